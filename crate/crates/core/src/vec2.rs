//! Minimal planar vector helpers over `[T; 2]`.

use crate::scalar::Scalar;

pub type Point<T> = [T; 2];

#[inline]
pub fn zero<T: Scalar>() -> Point<T> {
    [T::zero(), T::zero()]
}

#[inline]
pub fn add<T: Scalar>(a: Point<T>, b: Point<T>) -> Point<T> {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn sub<T: Scalar>(a: Point<T>, b: Point<T>) -> Point<T> {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn scale<T: Scalar>(s: T, a: Point<T>) -> Point<T> {
    [s * a[0], s * a[1]]
}

/// `acc += s * a`
#[inline]
pub fn axpy<T: Scalar>(acc: &mut Point<T>, s: T, a: Point<T>) {
    acc[0] += s * a[0];
    acc[1] += s * a[1];
}

#[inline]
pub fn dot<T: Scalar>(a: Point<T>, b: Point<T>) -> T {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn norm_sq<T: Scalar>(a: Point<T>) -> T {
    dot(a, a)
}

#[inline]
pub fn norm<T: Scalar>(a: Point<T>) -> T {
    a[0].hypot(a[1])
}

/// Counter-clockwise rotation by a quarter turn.
#[inline]
pub fn perp<T: Scalar>(a: Point<T>) -> Point<T> {
    [-a[1], a[0]]
}

/// Counter-clockwise rotation by `angle`.
#[inline]
pub fn rotate<T: Scalar>(angle: T, a: Point<T>) -> Point<T> {
    let (s, c) = angle.sin_cos();
    [c * a[0] - s * a[1], s * a[0] + c * a[1]]
}
