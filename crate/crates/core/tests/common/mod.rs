#![allow(dead_code)]

/// Minimum over all permutations by Heap's algorithm.
pub fn brute_force_min(costs: &[Vec<f64>]) -> f64 {
    let n = costs.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let total = |p: &[usize]| p.iter().enumerate().map(|(i, &j)| costs[i][j]).sum::<f64>();
    let mut best = total(&perm);
    let mut c = vec![0; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.min(total(&perm));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    if b <= a {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `int q (z+t)_+^(q-1) g(t) dt` over `[nodes[0], nodes[last]]`, segment by segment
/// after the substitution `u = (z+t)^q`, which removes the pole.
pub fn singular_integral(q: f64, z: f64, nodes: &[f64], g: &dyn Fn(f64) -> f64, tol: f64) -> f64 {
    nodes
        .windows(2)
        .map(|w| {
            let (s0, s1) = ((z + w[0]).max(0.0), z + w[1]);
            if s1 <= 0.0 {
                return 0.0;
            }
            let (u0, u1) = (s0.powf(q), s1.powf(q));
            // keep the evaluation point inside the segment despite rounding
            simpson(&|u: f64| g((u.powf(1.0 / q) - z).clamp(w[0], w[1])), u0, u1, tol)
        })
        .sum()
}
