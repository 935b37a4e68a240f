//! Small numerical kernels: bracketed root finding, phase unwrapping and
//! peak / half-maximum location on sampled curves.
//!
//! Everything here is a pure function of its inputs.

use crate::{NumericsError, Scalar};

type Result<T> = std::result::Result<T, NumericsError>;

/// Default relative tolerance for frequency roots.
pub const DEFAULT_REL_TOL: f64 = 1e-10;
/// Smallest relative tolerance `find_root` accepts.
pub const MIN_REL_TOL: f64 = 1e-14;

const MAX_ITERATIONS: usize = 4000;

/// An interval known to contain a sign change of some function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket<T> {
    pub lo: T,
    pub hi: T,
    pub f_lo: T,
    pub f_hi: T,
}

impl<T: Scalar> Bracket<T> {
    /// Evaluates `f` at both endpoints and checks for a sign change.
    pub fn new<F: FnMut(T) -> T>(mut f: F, lo: T, hi: T) -> Result<Self> {
        let f_lo = f(lo);
        let f_hi = f(hi);
        Self::from_values(lo, hi, f_lo, f_hi)
    }

    pub fn from_values(lo: T, hi: T, f_lo: T, f_hi: T) -> Result<Self> {
        let err = |reason| NumericsError::InvalidBracket { lo: lo.as_f64(), hi: hi.as_f64(), reason };
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(err("endpoints must be finite"));
        }
        if lo >= hi {
            return Err(err("lo must be below hi"));
        }
        if !f_lo.is_finite() {
            return Err(NumericsError::NonFinite { x: lo.as_f64() });
        }
        if !f_hi.is_finite() {
            return Err(NumericsError::NonFinite { x: hi.as_f64() });
        }
        if f_lo * f_hi > T::zero() {
            return Err(err("no sign change"));
        }
        Ok(Self { lo, hi, f_lo, f_hi })
    }
}

/// Finds a root of `f` inside `bracket`.
///
/// Alternates false-position and bisection steps, so the bracket at least
/// halves every second evaluation. Stops once the bracket is narrower than
/// `rel_tol * |x|` or no floating-point number is left strictly inside it.
///
/// A sign change produced by a pole is rejected: if the function values at
/// both shrunken endpoints end up larger than at the original endpoints, the
/// bracket closed onto a singularity.
pub fn find_root<T, F>(mut f: F, bracket: &Bracket<T>, rel_tol: T) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    if !(rel_tol.as_f64() >= MIN_REL_TOL) {
        return Err(NumericsError::Tolerance(rel_tol.as_f64()));
    }
    let Bracket { mut lo, mut hi, mut f_lo, mut f_hi } = *bracket;
    if f_lo == T::zero() {
        return Ok(lo);
    }
    if f_hi == T::zero() {
        return Ok(hi);
    }
    let initial_scale = f_lo.abs().max(f_hi.abs());
    let two = T::lit(2.0);

    let mut converged = false;
    for iteration in 0..MAX_ITERATIONS {
        let scale = lo.abs().max(hi.abs());
        if hi - lo <= rel_tol * scale {
            converged = true;
            break;
        }
        let mid = lo + (hi - lo) / two;
        let mut x = if iteration % 2 == 0 { lo - f_lo * (hi - lo) / (f_hi - f_lo) } else { mid };
        if !(x > lo && x < hi) {
            x = mid;
        }
        if !(x > lo && x < hi) {
            // lo and hi are adjacent floats
            converged = true;
            break;
        }
        let fx = f(x);
        if !fx.is_finite() {
            return Err(NumericsError::NonFinite { x: x.as_f64() });
        }
        if fx == T::zero() {
            return Ok(x);
        }
        if (fx < T::zero()) == (f_lo < T::zero()) {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
    }
    if !converged {
        return Err(NumericsError::IterationLimit { iterations: MAX_ITERATIONS });
    }
    if f_lo.abs().min(f_hi.abs()) > initial_scale {
        return Err(NumericsError::PoleInBracket { lo: bracket.lo.as_f64(), hi: bracket.hi.as_f64() });
    }
    // final linear interpolation, clamped to the bracket
    let x = lo - f_lo * (hi - lo) / (f_hi - f_lo);
    Ok(if x >= lo && x <= hi { x } else { lo + (hi - lo) / two })
}

/// Sampled real function on a strictly increasing abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T> {
    xs: Vec<T>,
    ys: Vec<T>,
}

impl<T: Scalar> GridFunction<T> {
    pub fn new(xs: Vec<T>, ys: Vec<T>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(NumericsError::InvalidGrid("xs and ys differ in length"));
        }
        if xs.len() < 2 {
            return Err(NumericsError::InvalidGrid("need at least two samples"));
        }
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return Err(NumericsError::InvalidGrid("non-finite sample"));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(NumericsError::InvalidGrid("xs must be strictly increasing"));
        }
        Ok(Self { xs, ys })
    }

    /// Samples `f` on `n` uniformly spaced points spanning `[lo, hi]`.
    pub fn sample<F: FnMut(T) -> T>(mut f: F, lo: T, hi: T, n: usize) -> Result<Self> {
        let xs = linspace(lo, hi, n);
        let ys = xs.iter().map(|&x| f(x)).collect();
        Self::new(xs, ys)
    }

    pub fn xs(&self) -> &[T] {
        &self.xs
    }

    pub fn ys(&self) -> &[T] {
        &self.ys
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn into_parts(self) -> (Vec<T>, Vec<T>) {
        (self.xs, self.ys)
    }
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace<T: Scalar>(lo: T, hi: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let last = T::from_usize(n - 1).unwrap();
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        hi
                    } else {
                        let t = T::from_usize(i).unwrap() / last;
                        lo + (hi - lo) * t
                    }
                })
                .collect()
        }
    }
}

/// Removes 2π jumps from a sequence of angles.
///
/// Each step is replaced by the representative of the raw step modulo 2π
/// that lies within ±π. The correction is tracked as an integer count of
/// turns, so `out[i] - angles[i]` is always `2π k` for integer `k`.
pub fn unwrap_angles<T: Scalar>(angles: &[T]) -> Vec<T> {
    let tau = T::TAU();
    let mut turns = T::zero();
    let mut out = Vec::with_capacity(angles.len());
    let mut prev: Option<T> = None;
    for &a in angles {
        if let Some(p) = prev {
            turns = turns - ((a - p) / tau).round();
        }
        out.push(a + turns * tau);
        prev = Some(a);
    }
    out
}

/// [`unwrap_angles`] applied to the ordinates of a grid.
pub fn unwrap_phase<T: Scalar>(grid: &GridFunction<T>) -> GridFunction<T> {
    GridFunction { xs: grid.xs.clone(), ys: unwrap_angles(&grid.ys) }
}

/// Location and half-maximum abscissas of a single peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakWidth<T> {
    pub x_peak: T,
    pub y_peak: T,
    pub x_left_half: T,
    pub x_right_half: T,
}

impl<T: Scalar> PeakWidth<T> {
    pub fn full_width(&self) -> T {
        self.x_right_half - self.x_left_half
    }
}

/// Locates the maximum of a sampled curve and its half-maximum crossings.
///
/// `refine` is the continuous function behind the samples. The peak is
/// polished by golden-section search between the neighbours of the best
/// sample; each half-maximum abscissa by root finding on
/// `refine(x) - y_peak / 2` between the first sample below half maximum and
/// its inner neighbour.
pub fn peak_and_halfmax<T, F>(grid: &GridFunction<T>, mut refine: F) -> Result<PeakWidth<T>>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    let (xs, ys) = (&grid.xs, &grid.ys);
    let n = xs.len();
    let best = argmax(ys);
    if best == 0 || best == n - 1 {
        return Err(NumericsError::PeakNotBracketed);
    }

    let (mut x_peak, mut y_peak) = golden_section_max(&mut refine, xs[best - 1], xs[best + 1]);
    if !(y_peak >= ys[best]) {
        x_peak = xs[best];
        y_peak = refine(x_peak);
    }
    let half = y_peak / T::lit(2.0);
    let mut g = |x: T| refine(x) - half;

    let left = (0..best).rev().find(|&j| ys[j] < half).ok_or(NumericsError::HalfWidthNotBracketed)?;
    let right = (best + 1..n).find(|&j| ys[j] < half).ok_or(NumericsError::HalfWidthNotBracketed)?;

    let tol = T::lit(MIN_REL_TOL);
    let x_left_half = crossing(&mut g, xs[left], xs[left + 1], x_peak, tol)?;
    let x_right_half = crossing(&mut g, xs[right - 1], xs[right], x_peak, tol)?;
    Ok(PeakWidth { x_peak, y_peak, x_left_half, x_right_half })
}

/// Root of `g` between two samples, widening toward the peak if the inner
/// sample turns out to sit below half maximum after refinement.
fn crossing<T, G>(g: &mut G, a: T, b: T, x_peak: T, tol: T) -> Result<T>
where
    T: Scalar,
    G: FnMut(T) -> T,
{
    let bracket = match Bracket::new(&mut *g, a, b) {
        Ok(br) => Ok(br),
        Err(_) if a < x_peak => Bracket::new(&mut *g, a, x_peak),
        Err(_) => Bracket::new(&mut *g, x_peak, b),
    }
    .map_err(|_| NumericsError::HalfWidthNotBracketed)?;
    find_root(g, &bracket, tol)
}

fn argmax<T: Scalar>(ys: &[T]) -> usize {
    let mut best = 0;
    for (i, &y) in ys.iter().enumerate() {
        if y > ys[best] {
            best = i;
        }
    }
    best
}

fn golden_section_max<T, F>(f: &mut F, mut a: T, mut b: T) -> (T, T)
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    let inv_phi = T::lit(0.618_033_988_749_894_8);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if !(c < d) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Samples `f` on `[lo, hi]` and re-grids around the best sample until the
/// peak is resolved by at least `min_above_half` samples and both
/// half-maximum crossings fall inside the grid.
///
/// Needed when the peak is many orders of magnitude narrower than the
/// search window. Each zoom keeps ±6 original steps around the best sample,
/// which always contains both half-maximum points of an unresolved
/// unimodal peak.
pub fn zoom_to_peak<T, F>(mut f: F, lo: T, hi: T, n: usize, min_above_half: usize) -> Result<GridFunction<T>>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    if n < 16 {
        return Err(NumericsError::InvalidGrid("need at least 16 samples"));
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..64 {
        let grid = GridFunction::sample(&mut f, a, b, n)?;
        let ys = grid.ys();
        let best = argmax(ys);
        let half = ys[best] / T::lit(2.0);
        let above = ys.iter().filter(|&&y| y >= half).count();
        let bracketed = ys[..best].iter().any(|&y| y < half) && ys[best..].iter().any(|&y| y < half);
        if (above >= min_above_half && bracketed) || best == 0 || best == n - 1 {
            return Ok(grid);
        }
        let xs = grid.xs();
        let (na, nb) = (xs[best.saturating_sub(6)], xs[(best + 6).min(n - 1)]);
        if !(na > a || nb < b) || !(nb - na > T::zero()) {
            return Ok(grid);
        }
        a = na;
        b = nb;
    }
    GridFunction::sample(f, a, b, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{PI, SQRT_2, TAU};

    #[test]
    fn sqrt_two() {
        let f = |x: f64| x * x - 2.0;
        let br = Bracket::new(f, 1.0, 2.0).unwrap();
        let r = find_root(f, &br, 1e-12).unwrap();
        assert_relative_eq!(r, SQRT_2, max_relative = 1e-12);
    }

    #[test]
    fn cosine_zero() {
        let br = Bracket::new(f64::cos, 1.0, 2.0).unwrap();
        let r = find_root(f64::cos, &br, 1e-14).unwrap();
        assert_relative_eq!(r, PI / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn works_in_single_precision() {
        let f = |x: f32| x * x - 2.0;
        let br = Bracket::new(f, 1.0f32, 2.0).unwrap();
        let r = find_root(f, &br, 1e-6f32).unwrap();
        assert!((r - std::f32::consts::SQRT_2).abs() < 1e-6);
    }

    #[test]
    fn endpoint_root_is_returned() {
        let f = |x: f64| x - 1.0;
        let br = Bracket::new(f, 1.0, 3.0).unwrap();
        assert_eq!(find_root(f, &br, 1e-12).unwrap(), 1.0);
    }

    #[test]
    fn bracket_errors() {
        let f = |x: f64| x * x + 1.0;
        assert!(matches!(Bracket::new(f, -1.0, 1.0), Err(NumericsError::InvalidBracket { .. })));
        assert!(matches!(Bracket::new(f, 1.0, -1.0), Err(NumericsError::InvalidBracket { .. })));
        assert!(matches!(Bracket::new(|x: f64| x.ln(), -1.0, 2.0), Err(NumericsError::NonFinite { .. })));
    }

    #[test]
    fn rejects_tolerance_below_floor() {
        let f = |x: f64| x;
        let br = Bracket::new(f, -1.0, 2.0).unwrap();
        assert!(matches!(find_root(f, &br, 1e-16), Err(NumericsError::Tolerance(_))));
    }

    #[test]
    fn non_finite_evaluation_reports_x() {
        let f = |x: f64| if x > 0.2 && x < 0.9 { f64::NAN } else { x - 0.5 };
        let br = Bracket::new(f, 0.0, 1.0).unwrap();
        match find_root(f, &br, 1e-12) {
            Err(NumericsError::NonFinite { x }) => assert!(x > 0.2 && x < 0.9),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn pole_is_not_a_root() {
        // tan has a pole at pi/2 with a sign change across it
        let br = Bracket::new(f64::tan, 1.0, 2.0).unwrap();
        assert!(matches!(find_root(f64::tan, &br, 1e-12), Err(NumericsError::PoleInBracket { .. })));
        let inv = |x: f64| 1.0 / (x - 0.3);
        let br = Bracket::new(inv, 0.0, 1.0).unwrap();
        assert!(matches!(find_root(inv, &br, 1e-12), Err(NumericsError::PoleInBracket { .. })));
    }

    #[test]
    fn unwrap_single_jump() {
        let out = unwrap_angles(&[0.0, 3.0, -3.0, 0.2]);
        assert_eq!(out[0], 0.0);
        assert_eq!(out[1], 3.0);
        assert_relative_eq!(out[2], -3.0 + TAU, max_relative = 1e-15);
        // the raw step 0.2 - (-3) = 3.2 exceeds pi, so its ±pi representative is 3.2 - 2pi
        assert_relative_eq!(out[3], 0.2, max_relative = 1e-15);
    }

    #[test]
    fn unwrap_constant_is_identity() {
        let xs = [1.25; 7];
        assert_eq!(unwrap_angles(&xs), xs.to_vec());
    }

    #[test]
    fn unwrap_grid_keeps_abscissa() {
        let g = GridFunction::new(vec![0.0, 1.0, 2.0], vec![3.0, -3.0, -2.5]).unwrap();
        let u = unwrap_phase(&g);
        assert_eq!(u.xs(), g.xs());
        assert_relative_eq!(u.ys()[2], -2.5 + TAU);
    }

    #[test]
    fn grid_validation() {
        assert!(GridFunction::new(vec![0.0], vec![1.0]).is_err());
        assert!(GridFunction::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(GridFunction::new(vec![0.0, 1.0], vec![1.0, f64::NAN]).is_err());
        assert!(GridFunction::new(vec![0.0, 1.0], vec![1.0]).is_err());
    }

    fn lorentz(x0: f64, k: f64) -> impl Fn(f64) -> f64 {
        move |x| k / ((x - x0).powi(2) + k * k / 4.0)
    }

    #[test]
    fn lorentzian_center_and_width() {
        let (x0, k) = (3.7, 0.05);
        let f = lorentz(x0, k);
        let g = GridFunction::sample(&f, x0 - 10.0 * k, x0 + 10.0 * k, 201).unwrap();
        let p = peak_and_halfmax(&g, &f).unwrap();
        assert_relative_eq!(p.x_peak, x0, max_relative = 1e-6);
        assert_relative_eq!(p.full_width(), k, max_relative = 1e-6);
        assert_relative_eq!(p.y_peak, 4.0 / k, max_relative = 1e-12);
    }

    #[test]
    fn triangle_peak() {
        // apex 2.0 at x = 1, half max at 0.5 and 1.5
        let tri = |x: f64| (2.0 - 2.0 * (x - 1.0).abs()).max(0.0);
        let g = GridFunction::sample(tri, -0.3, 2.1, 37).unwrap();
        let p = peak_and_halfmax(&g, tri).unwrap();
        assert!((p.x_peak - 1.0).abs() < 1e-7);
        assert!((p.x_left_half - 0.5).abs() < 1e-7);
        assert!((p.x_right_half - 1.5).abs() < 1e-7);
    }

    #[test]
    fn peak_errors() {
        let rising = |x: f64| x;
        let g = GridFunction::sample(rising, 0.0, 1.0, 10).unwrap();
        assert_eq!(peak_and_halfmax(&g, rising), Err(NumericsError::PeakNotBracketed));
        let f = lorentz(0.0, 10.0);
        let g = GridFunction::sample(&f, -1.0, 1.0, 11).unwrap();
        assert_eq!(peak_and_halfmax(&g, &f), Err(NumericsError::HalfWidthNotBracketed));
    }

    #[test]
    fn zoom_resolves_very_narrow_peak() {
        let (x0, k) = (0.4137, 1e-9);
        let f = lorentz(x0, k);
        let g = zoom_to_peak(&f, 0.0, 1.0, 401, 8).unwrap();
        let p = peak_and_halfmax(&g, &f).unwrap();
        assert_relative_eq!(p.x_peak, x0, max_relative = 1e-12);
        assert_relative_eq!(p.full_width(), k, max_relative = 1e-5);
    }

    proptest! {
        #[test]
        fn monotone_root_independent_of_bracket(r in -5.0f64..5.0, a in 0.1f64..3.0, b in 0.1f64..3.0) {
            let f = |x: f64| (x - r).powi(3) + (x - r);
            let br = Bracket::new(f, r - a, r + b).unwrap();
            let x = find_root(f, &br, 1e-13).unwrap();
            prop_assert!((x - r).abs() <= 1e-12 * r.abs().max(1.0));
        }

        #[test]
        fn unwrap_is_multiple_of_tau(xs in proptest::collection::vec(-PI..PI, 2..60)) {
            let out = unwrap_angles(&xs);
            prop_assert_eq!(out[0], xs[0]);
            for (o, x) in out.iter().zip(&xs) {
                let k = (o - x) / TAU;
                prop_assert!((k - k.round()).abs() < 1e-9);
            }
            for w in out.windows(2) {
                prop_assert!((w[1] - w[0]).abs() <= PI + 1e-12);
            }
        }

        #[test]
        fn any_lorentzian_is_recovered(x0 in -100.0f64..100.0, k in 1e-3f64..10.0, n in 41usize..400) {
            let f = lorentz(x0, k);
            let g = GridFunction::sample(&f, x0 - 10.0 * k, x0 + 10.3 * k, n).unwrap();
            let p = peak_and_halfmax(&g, &f).unwrap();
            prop_assert!((p.x_peak - x0).abs() <= 1e-6 * x0.abs().max(k));
            prop_assert!((p.full_width() - k).abs() <= 1e-6 * k);
        }
    }
}
