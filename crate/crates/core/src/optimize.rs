//! Derivative-free scalar and low-dimensional minimizers.

const INV_PHI: f64 = 0.618_033_988_749_894_8;
const INV_PHI2: f64 = 0.381_966_011_250_105_1;

/// Outcome of a scalar minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub fx: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Golden-section search on `[lo, hi]`.
///
/// Stops when the bracket width drops below `x_tol * (1 + |x|)`. Returns the
/// best point evaluated, not the bracket midpoint.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, x_tol: f64, max_iter: usize) -> Minimum {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut x1 = a + INV_PHI2 * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evals = 2;
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    let mut converged = false;

    for _ in 0..max_iter {
        if (b - a).abs() <= x_tol * (1.0 + best.0.abs()) {
            converged = true;
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + INV_PHI2 * (b - a);
            f1 = f(x1);
            evals += 1;
            if f1 < best.1 {
                best = (x1, f1);
            }
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
            evals += 1;
            if f2 < best.1 {
                best = (x2, f2);
            }
        }
    }
    if !converged && (b - a).abs() <= x_tol * (1.0 + best.0.abs()) {
        converged = true;
    }

    Minimum { x: best.0, fx: best.1, evaluations: evals, converged }
}

/// A downhill bracket `a < b < c` (or reversed) with `f(b) <= f(a), f(c)`.
#[derive(Debug, Clone, Copy)]
pub struct Bracket {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub fb: f64,
    pub evaluations: usize,
}

/// Expands from `x0` with initial `step` until the minimum is bracketed.
///
/// Returns `None` when `max_expansions` is exhausted (the function keeps
/// decreasing, which cannot happen for a coercive convex objective).
pub fn bracket_minimum<F: FnMut(f64) -> f64>(mut f: F, x0: f64, step: f64, max_expansions: usize) -> Option<Bracket> {
    let step = if step == 0.0 { 1.0 } else { step };
    let (mut a, mut b) = (x0, x0 + step);
    let (mut fa, mut fb) = (f(a), f(b));
    let mut evals = 2;
    if fb > fa {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = b + (1.0 + INV_PHI) * (b - a);
    let mut fc = f(c);
    evals += 1;
    let mut expansions = 0;
    while fc < fb {
        if expansions >= max_expansions {
            return None;
        }
        a = b;
        b = c;
        fb = fc;
        c = b + (1.0 + INV_PHI) * (b - a);
        fc = f(c);
        evals += 1;
        expansions += 1;
    }
    let _ = fa;
    Some(Bracket { a, b, c, fb, evaluations: evals })
}

/// Minimizes a convex function of one variable.
///
/// With a derivative, the bracket is refined by bisection on the sign of
/// `df`, which locates the minimizer to machine precision. Without one the
/// bracket is refined by golden-section search.
pub fn minimize_convex<F, D>(mut f: F, df: Option<D>, x0: f64, step: f64, x_tol: f64) -> Option<Minimum>
where
    F: FnMut(f64) -> f64,
    D: FnMut(f64) -> f64,
{
    let br = bracket_minimum(&mut f, x0, step, 200)?;
    let (lo, hi) = if br.a < br.c { (br.a, br.c) } else { (br.c, br.a) };
    match df {
        None => {
            let mut m = golden_section(&mut f, lo, hi, x_tol, 400);
            if br.fb < m.fx {
                m.x = br.b;
                m.fx = br.fb;
            }
            m.evaluations += br.evaluations;
            Some(m)
        }
        Some(mut df) => {
            let (mut a, mut b) = (lo, hi);
            let mut evals = br.evaluations;
            let mut converged = false;
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    converged = true;
                    break;
                }
                let d = df(mid);
                evals += 1;
                if d == 0.0 {
                    a = mid;
                    b = mid;
                    converged = true;
                    break;
                }
                if d > 0.0 {
                    b = mid;
                } else {
                    a = mid;
                }
                if (b - a).abs() <= x_tol * (1.0 + a.abs()) * 1e-3 {
                    converged = true;
                    break;
                }
            }
            let x = 0.5 * (a + b);
            let fx = f(x);
            evals += 1;
            let (x, fx) = if br.fb < fx { (br.b, br.fb) } else { (x, fx) };
            Some(Minimum { x, fx, evaluations: evals, converged })
        }
    }
}

/// Nelder-Mead simplex minimization in `x0.len()` dimensions.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: &[f64],
    f_tol: f64,
    max_iter: usize,
) -> (Vec<f64>, f64, usize) {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step[i];
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut evals = n + 1;

    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = (values[n] - values[0]).abs();
        if spread <= f_tol * (values[0].abs() + f_tol) {
            break;
        }

        let centroid: Vec<f64> = (0..n).map(|k| simplex[..n].iter().map(|v| v[k]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..n).map(|k| centroid[k] + t * (simplex[n][k] - centroid[k])).collect() };

        let xr = along(-1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
        } else {
            let (xc, fc) = if fr < values[n] {
                let xc = along(-0.5);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = f(&xc);
                (xc, fc)
            };
            evals += 1;
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
            } else {
                // shrink toward the best vertex
                let best = simplex[0].clone();
                for i in 1..=n {
                    for (v, b) in simplex[i].iter_mut().zip(&best) {
                        *v = b + 0.5 * (*v - b);
                    }
                    values[i] = f(&simplex[i]);
                    evals += 1;
                }
            }
        }
    }

    let best = (0..=n).min_by(|&i, &j| values[i].total_cmp(&values[j])).unwrap_or(0);
    (simplex[best].clone(), values[best], evals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_vertex() {
        let m = golden_section(|x| (x - 1.25).powi(2) + 3.0, -4.0, 9.0, 1e-10, 500);
        assert!(m.converged);
        assert!((m.x - 1.25).abs() < 1e-7);
        assert!((m.fx - 3.0).abs() < 1e-12);
    }

    #[test]
    fn bracket_handles_both_directions() {
        let br = bracket_minimum(|x| (x + 7.0).powi(2), 0.0, 1.0, 100).unwrap();
        let (lo, hi) = if br.a < br.c { (br.a, br.c) } else { (br.c, br.a) };
        assert!(lo <= -7.0 && -7.0 <= hi);
        let br = bracket_minimum(|x| (x - 30.0).abs(), 0.0, 0.5, 100).unwrap();
        let (lo, hi) = if br.a < br.c { (br.a, br.c) } else { (br.c, br.a) };
        assert!(lo <= 30.0 && 30.0 <= hi);
    }

    #[test]
    fn unbounded_below_is_reported() {
        assert!(bracket_minimum(|x| -x, 0.0, 1.0, 50).is_none());
    }

    #[test]
    fn derivative_bisection_is_exact() {
        let f = |x: f64| (x - 0.3).abs().powf(3.0);
        let df = |x: f64| 3.0 * (x - 0.3).abs() * (x - 0.3);
        let m = minimize_convex(f, Some(df), 5.0, 1.0, 1e-12).unwrap();
        assert!((m.x - 0.3).abs() < 1e-12, "{}", m.x);
    }

    #[test]
    fn convex_without_derivative() {
        let m = minimize_convex(|x: f64| (x - 2.0).powi(4) + x, None::<fn(f64) -> f64>, 0.0, 0.1, 1e-12).unwrap();
        // minimizer solves 4(x-2)^3 = -1
        let exact = 2.0 - 0.25f64.cbrt();
        assert!((m.x - exact).abs() < 1e-5);
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let rosen = |v: &[f64]| (1.0 - v[0]).powi(2) + 100.0 * (v[1] - v[0] * v[0]).powi(2);
        let (x, fx, _) = nelder_mead(rosen, &[-1.2, 1.0], &[0.5, 0.5], 1e-16, 5000);
        assert!(fx < 1e-12, "{fx}");
        assert!((x[0] - 1.0).abs() < 1e-5 && (x[1] - 1.0).abs() < 1e-5);
    }
}
