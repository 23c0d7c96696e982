//! Minimal tensor/layer/optimizer substrate with a verifiable gradient
//! contract.
//!
//! Everything is generic over [`Real`] so the same code trains in `f32`
//! (the checkpoint dtype) and gradient-checks in `f64`.

pub mod checkpoint;
pub mod gradcheck;
pub mod layers;
pub mod network;
pub mod optim;

pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointMeta, TargetNormalization};
pub use gradcheck::grad_check;
pub use layers::{LayerSpec, Padding};
pub use network::{Gradients, Network, Trace};
pub use optim::{Interpolation, Schedule, SgdMomentum};

use rand::distributions::uniform::SampleUniform;

/// Scalar element type of all tensors.
pub trait Real:
    num_traits::Float
    + std::ops::AddAssign
    + std::ops::SubAssign
    + std::ops::MulAssign
    + std::iter::Sum
    + SampleUniform
    + Send
    + Sync
    + std::fmt::Debug
    + std::fmt::Display
    + 'static
{
    /// Row-major `C[m×n] = alpha · A·B + beta · C`, with optional logical
    /// transposes of the stored operands.
    fn gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: &[Self],
        a_trans: bool,
        b: &[Self],
        b_trans: bool,
        beta: Self,
        c: &mut [Self],
    );

    /// Run `f` over a reusable thread-local scratch buffer of at least `len`
    /// elements (contents are unspecified on entry).
    fn with_scratch<R>(len: usize, f: impl FnOnce(&mut [Self]) -> R) -> R;

    fn from_f64(x: f64) -> Self {
        Self::from(x).expect("f64 conversion")
    }

    fn into_f64(self) -> f64;
}

thread_local! {
    static SCRATCH_F32: std::cell::RefCell<Vec<f32>> = const { std::cell::RefCell::new(Vec::new()) };
    static SCRATCH_F64: std::cell::RefCell<Vec<f64>> = const { std::cell::RefCell::new(Vec::new()) };
}

macro_rules! check_gemm_dims {
    ($m:ident, $k:ident, $n:ident, $a:ident, $b:ident, $c:ident) => {
        assert_eq!($a.len(), $m * $k, "gemm: A size");
        assert_eq!($b.len(), $k * $n, "gemm: B size");
        assert_eq!($c.len(), $m * $n, "gemm: C size");
    };
}

impl Real for f32 {
    fn gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: &[Self],
        a_trans: bool,
        b: &[Self],
        b_trans: bool,
        beta: Self,
        c: &mut [Self],
    ) {
        check_gemm_dims!(m, k, n, a, b, c);
        let (rsa, csa) = if a_trans { (1, m as isize) } else { (k as isize, 1) };
        let (rsb, csb) = if b_trans { (1, k as isize) } else { (n as isize, 1) };
        unsafe {
            matrixmultiply::sgemm(
                m, k, n, alpha, a.as_ptr(), rsa, csa, b.as_ptr(), rsb, csb, beta,
                c.as_mut_ptr(), n as isize, 1,
            );
        }
    }

    fn with_scratch<R>(len: usize, f: impl FnOnce(&mut [Self]) -> R) -> R {
        SCRATCH_F32.with(|cell| {
            let mut buf = cell.borrow_mut();
            if buf.len() < len {
                buf.resize(len, 0.0);
            }
            f(&mut buf[..len])
        })
    }

    fn into_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: &[Self],
        a_trans: bool,
        b: &[Self],
        b_trans: bool,
        beta: Self,
        c: &mut [Self],
    ) {
        check_gemm_dims!(m, k, n, a, b, c);
        let (rsa, csa) = if a_trans { (1, m as isize) } else { (k as isize, 1) };
        let (rsb, csb) = if b_trans { (1, k as isize) } else { (n as isize, 1) };
        unsafe {
            matrixmultiply::dgemm(
                m, k, n, alpha, a.as_ptr(), rsa, csa, b.as_ptr(), rsb, csb, beta,
                c.as_mut_ptr(), n as isize, 1,
            );
        }
    }

    fn with_scratch<R>(len: usize, f: impl FnOnce(&mut [Self]) -> R) -> R {
        SCRATCH_F64.with(|cell| {
            let mut buf = cell.borrow_mut();
            if buf.len() < len {
                buf.resize(len, 0.0);
            }
            f(&mut buf[..len])
        })
    }

    fn into_f64(self) -> f64 {
        self
    }
}

/// Dense N-dimensional array, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T: Real> Tensor<T> {
    pub fn new(shape: Vec<usize>, data: Vec<T>) -> Self {
        assert_eq!(
            shape.iter().product::<usize>(),
            data.len(),
            "tensor shape {shape:?} does not match data length {}",
            data.len()
        );
        Self { shape, data }
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Self { shape: shape.to_vec(), data: vec![T::zero(); shape.iter().product()] }
    }

    pub fn full(shape: &[usize], value: T) -> Self {
        Self { shape: shape.to_vec(), data: vec![value; shape.iter().product()] }
    }

    pub fn from_f64_slice(shape: &[usize], values: &[f64]) -> Self {
        Self::new(shape.to_vec(), values.iter().map(|&v| T::from_f64(v)).collect())
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn reshaped(mut self, shape: Vec<usize>) -> Self {
        assert_eq!(shape.iter().product::<usize>(), self.data.len());
        self.shape = shape;
        self
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { shape: self.shape.clone(), data: self.data.iter().map(|&v| f(v)).collect() }
    }

    /// `self += other`, shapes must match.
    pub fn add_assign(&mut self, other: &Tensor<T>) {
        assert_eq!(self.shape, other.shape);
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn scale_in_place(&mut self, s: T) {
        for v in &mut self.data {
            *v *= s;
        }
    }
}
