//! Global modal unknowns.

/// Vector-space operations the time stepper needs.
pub trait OdeState: Clone {
    /// `a * self + b * other`
    fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Self;

    /// Index of the first block holding a NaN or infinity, if any. For
    /// [`ModalState`] the block is an element.
    fn first_non_finite(&self) -> Option<usize>;
}

impl OdeState for Vec<f64> {
    fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Self {
        self.iter().zip(other).map(|(x, y)| a * x + b * y).collect()
    }

    fn first_non_finite(&self) -> Option<usize> {
        self.iter().position(|v| !v.is_finite())
    }
}

/// Coefficients indexed by `(element, component, mode)`, stored contiguously
/// in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalState {
    n_elements: usize,
    n_components: usize,
    n_modes: usize,
    data: Vec<f64>,
}

impl ModalState {
    pub fn zeros(n_elements: usize, n_components: usize, n_modes: usize) -> Self {
        ModalState {
            n_elements,
            n_components,
            n_modes,
            data: vec![0.0; n_elements * n_components * n_modes],
        }
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn n_components(&self) -> usize {
        self.n_components
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.n_elements, self.n_components, self.n_modes)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    fn offset(&self, element: usize, component: usize) -> usize {
        (element * self.n_components + component) * self.n_modes
    }

    pub fn modes(&self, element: usize, component: usize) -> &[f64] {
        let o = self.offset(element, component);
        &self.data[o..o + self.n_modes]
    }

    pub fn modes_mut(&mut self, element: usize, component: usize) -> &mut [f64] {
        let o = self.offset(element, component);
        &mut self.data[o..o + self.n_modes]
    }

    /// All components of one element.
    pub fn element(&self, element: usize) -> &[f64] {
        let o = self.offset(element, 0);
        &self.data[o..o + self.n_components * self.n_modes]
    }

    pub fn element_mut(&mut self, element: usize) -> &mut [f64] {
        let o = self.offset(element, 0);
        let len = self.n_components * self.n_modes;
        &mut self.data[o..o + len]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl OdeState for ModalState {
    fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Self {
        debug_assert_eq!(self.data.len(), other.data.len());
        ModalState {
            data: self.data.lin_comb(a, &other.data, b),
            ..*self
        }
    }

    fn first_non_finite(&self) -> Option<usize> {
        let block = self.n_components * self.n_modes;
        self.data.first_non_finite().map(|i| i / block.max(1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_and_lin_comb() {
        let mut s = ModalState::zeros(3, 2, 4);
        s.modes_mut(1, 1)[2] = 5.0;
        assert_eq!(s.as_slice()[(1 * 2 + 1) * 4 + 2], 5.0);
        assert_eq!(s.element(1)[4 + 2], 5.0);
        let t = s.lin_comb(2.0, &s, -1.0);
        assert_eq!(t.modes(1, 1)[2], 5.0);
        assert_eq!(t.shape(), (3, 2, 4));
    }

    #[test]
    fn non_finite_is_located_by_element() {
        let mut s = ModalState::zeros(4, 2, 3);
        assert_eq!(s.first_non_finite(), None);
        s.modes_mut(2, 1)[0] = f64::NAN;
        assert_eq!(s.first_non_finite(), Some(2));
    }
}
