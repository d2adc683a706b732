//! Central-difference stencils with Richardson refinement.
//!
//! Every derivative in the crate that is not supplied by an analytic
//! callback flows through these helpers, so their conventions (step `h`,
//! evaluation at `t = 0`) are fixed here once.

/// First derivative by the symmetric two-point stencil, O(h^2).
pub fn d1_central<F: FnMut(f64) -> f64>(h: f64, mut f: F) -> f64 {
    (f(h) - f(-h)) / (2.0 * h)
}

/// First derivative by the five-point stencil, O(h^4).
pub fn d1_five_point<F: FnMut(f64) -> f64>(h: f64, mut f: F) -> f64 {
    (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h)
}

/// Second derivative by the five-point stencil, O(h^4).
///
/// Exact on polynomials up to degree 5 (modulo roundoff ~ eps/h^2).
pub fn d2_five_point<F: FnMut(f64) -> f64>(h: f64, mut f: F) -> f64 {
    (-f(2.0 * h) + 16.0 * f(h) - 30.0 * f(0.0) + 16.0 * f(-h) - f(-2.0 * h)) / (12.0 * h * h)
}

/// First derivative with Richardson halving: returns the extrapolated value
/// and an error estimate from the h vs h/2 disagreement.
pub fn d1_richardson<F: FnMut(f64) -> f64>(h: f64, mut f: F) -> (f64, f64) {
    let coarse = (f(h) - f(-h)) / (2.0 * h);
    let fine = (f(h / 2.0) - f(-h / 2.0)) / h;
    ((4.0 * fine - coarse) / 3.0, (fine - coarse).abs() / 3.0)
}

/// Second derivative with Richardson halving over the three-point stencil.
pub fn d2_richardson<F: FnMut(f64) -> f64>(h: f64, mut f: F) -> (f64, f64) {
    let mid = f(0.0);
    let coarse = (f(h) - 2.0 * mid + f(-h)) / (h * h);
    let fine = (f(h / 2.0) - 2.0 * mid + f(-h / 2.0)) / (h * h / 4.0);
    ((4.0 * fine - coarse) / 3.0, (fine - coarse).abs() / 3.0)
}

/// Mixed second derivative d^2/(ds dt) at the origin by the four-corner
/// cross stencil, O(h^2).
pub fn d2_mixed<F: FnMut(f64, f64) -> f64>(h: f64, mut f: F) -> f64 {
    (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h)
}

/// Mixed second derivative with Richardson halving.
pub fn d2_mixed_richardson<F: FnMut(f64, f64) -> f64>(h: f64, mut f: F) -> (f64, f64) {
    let corner = |g: &mut F, s: f64| (g(s, s) - g(s, -s) - g(-s, s) + g(-s, -s)) / (4.0 * s * s);
    let coarse = corner(&mut f, h);
    let fine = corner(&mut f, h / 2.0);
    ((4.0 * fine - coarse) / 3.0, (fine - coarse).abs() / 3.0)
}
