use super::LaError;

/// Anything that can be applied to a vector.
///
/// Implementors must be linear. `apply` writes into `y` (fully overwriting
/// it) and must be callable concurrently from several threads.
pub trait LinearOperator: Send + Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);

    fn apply_transpose(&self, _x: &[f64], _y: &mut [f64]) -> Result<(), LaError> {
        Err(LaError::Unsupported("apply_transpose"))
    }

    /// Allocating convenience wrapper around [`LinearOperator::apply`].
    fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows()];
        self.apply(x, &mut y);
        y
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn nrows(&self) -> usize {
        (**self).nrows()
    }
    fn ncols(&self) -> usize {
        (**self).ncols()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply(x, y)
    }
    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) -> Result<(), LaError> {
        (**self).apply_transpose(x, y)
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for Box<T> {
    fn nrows(&self) -> usize {
        (**self).nrows()
    }
    fn ncols(&self) -> usize {
        (**self).ncols()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply(x, y)
    }
    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) -> Result<(), LaError> {
        (**self).apply_transpose(x, y)
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for std::sync::Arc<T> {
    fn nrows(&self) -> usize {
        (**self).nrows()
    }
    fn ncols(&self) -> usize {
        (**self).ncols()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply(x, y)
    }
    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) -> Result<(), LaError> {
        (**self).apply_transpose(x, y)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct IdentityOperator(pub usize);

impl LinearOperator for IdentityOperator {
    fn nrows(&self) -> usize {
        self.0
    }
    fn ncols(&self) -> usize {
        self.0
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
    }
    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) -> Result<(), LaError> {
        y.copy_from_slice(x);
        Ok(())
    }
}

/// `s · A`.
pub struct ScaledOperator<A> {
    pub scale: f64,
    pub inner: A,
}

impl<A: LinearOperator> LinearOperator for ScaledOperator<A> {
    fn nrows(&self) -> usize {
        self.inner.nrows()
    }
    fn ncols(&self) -> usize {
        self.inner.ncols()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.inner.apply(x, y);
        y.iter_mut().for_each(|v| *v *= self.scale);
    }
}

/// Sum of operators with equal shapes.
pub struct SumOperator {
    terms: Vec<Box<dyn LinearOperator>>,
}

impl SumOperator {
    pub fn new(terms: Vec<Box<dyn LinearOperator>>) -> Result<Self, LaError> {
        if let Some(first) = terms.first() {
            for t in &terms[1..] {
                super::check_dim("sum rows", first.nrows(), t.nrows())?;
                super::check_dim("sum cols", first.ncols(), t.ncols())?;
            }
        } else {
            return Err(LaError::Unsupported("empty operator sum"));
        }
        Ok(Self { terms })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

impl LinearOperator for SumOperator {
    fn nrows(&self) -> usize {
        self.terms[0].nrows()
    }
    fn ncols(&self) -> usize {
        self.terms[0].ncols()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.terms[0].apply(x, y);
        let mut tmp = vec![0.0; y.len()];
        for t in &self.terms[1..] {
            t.apply(x, &mut tmp);
            axpy(1.0, &tmp, y);
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += a · x`.
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}
