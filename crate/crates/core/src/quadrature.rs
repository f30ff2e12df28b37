//! Adaptive Simpson quadrature over piecewise-smooth integrands.

/// Integrates `f` over `[a, b]`, splitting first at every breakpoint that
/// falls strictly inside the interval. Breakpoints should cover every
/// discontinuity or kink of `f`.
pub fn integrate<F>(f: F, a: f64, b: f64, breakpoints: &[f64], tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    if b <= a {
        return 0.0;
    }
    let mut knots: Vec<f64> = std::iter::once(a)
        .chain(breakpoints.iter().copied().filter(|&x| x > a && x < b))
        .chain(std::iter::once(b))
        .collect();
    knots.sort_by(|x, y| x.total_cmp(y));
    knots.dedup();
    let pieces = (knots.len() - 1) as f64;
    knots
        .windows(2)
        .map(|w| simpson(&f, w[0], w[1], tol / pieces))
        .sum()
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let c = 0.5 * (a + b);
    let fc = f(c);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
    refine(f, a, b, fa, fb, fc, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    fc: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let c = 0.5 * (a + b);
    let d = 0.5 * (a + c);
    let e = 0.5 * (c + b);
    let fd = f(d);
    let fe = f(e);
    let left = (c - a) / 6.0 * (fa + 4.0 * fd + fc);
    let right = (b - c) / 6.0 * (fc + 4.0 * fe + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    refine(f, a, c, fa, fc, fd, left, 0.5 * tol, depth - 1)
        + refine(f, c, b, fc, fb, fe, right, 0.5 * tol, depth - 1)
}
