use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::sync::Arc;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};
use rustfft::{FftDirection, FftNum, FftPlanner};

/// In-place complex transform of a fixed length.
pub trait FourierPlan<T>: Send + Sync {
    fn len(&self) -> usize;
    fn process(&self, buffer: &mut [Complex<T>]);
}

struct RustFftPlan<T: FftNum>(Arc<dyn rustfft::Fft<T>>);

impl<T: FftNum> FourierPlan<T> for RustFftPlan<T> {
    fn len(&self) -> usize {
        self.0.len()
    }

    fn process(&self, buffer: &mut [Complex<T>]) {
        self.0.process(buffer);
    }
}

fn plan<T: FftNum>(len: usize, inverse: bool) -> Arc<dyn FourierPlan<T>> {
    let direction = if inverse {
        FftDirection::Inverse
    } else {
        FftDirection::Forward
    };
    Arc::new(RustFftPlan(FftPlanner::new().plan_fft(len, direction)))
}

/// Floating-point scalar used throughout the crate (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + Sum + Default + Display + Debug + Send + Sync + 'static
{
    /// Unnormalized forward (`e^{-2πi jk/N}`) or inverse transform plan.
    fn fourier_plan(len: usize, inverse: bool) -> Arc<dyn FourierPlan<Self>>;

    /// Machine-independent literal conversion.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn from_usize_exact(n: usize) -> Self {
        Self::from_usize(n).expect("index representable")
    }
}

impl Real for f64 {
    fn fourier_plan(len: usize, inverse: bool) -> Arc<dyn FourierPlan<Self>> {
        plan(len, inverse)
    }
}

impl Real for f32 {
    fn fourier_plan(len: usize, inverse: bool) -> Arc<dyn FourierPlan<Self>> {
        plan(len, inverse)
    }
}

/// Largest absolute entry of a slice.
pub fn sup_norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}

/// Largest absolute entrywise difference of two slices.
pub fn sup_diff<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs()))
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// `y += a * x`
pub fn axpy<T: Real>(a: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + a * xi;
    }
}
