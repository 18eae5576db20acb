//! The standard simplex: barycentric grids, projection and a derivative-free
//! minimizer restricted to it.

use nalgebra::DVector;

/// Number of grid points `C(resolution + n - 1, n - 1)`, saturating.
pub fn grid_size(n: usize, resolution: usize) -> u128 {
    let mut acc: u128 = 1;
    for k in 1..n {
        acc = acc.saturating_mul((resolution + k) as u128) / k as u128;
    }
    acc
}

/// Largest resolution `<= wanted` whose grid has at most `cap` points.
pub fn capped_resolution(n: usize, wanted: usize, cap: u128) -> usize {
    let mut r = wanted.max(1);
    while r > 1 && grid_size(n, r) > cap {
        r = (r * 9) / 10;
    }
    r
}

/// All points `k / resolution` of the simplex with integer `k >= 0` summing
/// to `resolution`, in lexicographic order of `k`.
pub fn grid(n: usize, resolution: usize) -> Vec<DVector<f64>> {
    let mut out = Vec::new();
    let mut k = vec![0usize; n];
    fn rec(i: usize, left: usize, k: &mut Vec<usize>, res: usize, out: &mut Vec<DVector<f64>>) {
        let n = k.len();
        if i + 1 == n {
            k[i] = left;
            out.push(DVector::from_iterator(n, k.iter().map(|&x| x as f64 / res as f64)));
            return;
        }
        for v in 0..=left {
            k[i] = v;
            rec(i + 1, left - v, k, res, out);
        }
    }
    if n > 0 {
        rec(0, resolution, &mut k, resolution.max(1), &mut out);
    }
    out
}

/// Euclidean projection onto `{x >= 0, sum x = 1}`.
pub fn project(v: &DVector<f64>) -> DVector<f64> {
    let mut u: Vec<f64> = v.iter().copied().collect();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            tau = t;
        }
    }
    v.map(|x| (x - tau).max(0.0))
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: DVector<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Nelder-Mead on `f(project(x))`, so every evaluated point is on the
/// simplex. Stops after `max_evals` evaluations, when the value spread falls
/// below `ftol`, or as soon as `stop(value)` holds.
pub fn nelder_mead<F, S>(f: F, x0: &DVector<f64>, step: f64, max_evals: usize, ftol: f64, stop: S) -> Minimum
where
    F: Fn(&DVector<f64>) -> f64,
    S: Fn(f64) -> bool,
{
    let n = x0.len();
    let evals = std::cell::Cell::new(0usize);
    let eval = |x: &DVector<f64>| {
        evals.set(evals.get() + 1);
        let p = project(x);
        let v = f(&p);
        (p, if v.is_nan() { f64::INFINITY } else { v })
    };
    let mut pts: Vec<(DVector<f64>, f64)> = Vec::with_capacity(n + 1);
    let (p0, f0) = eval(x0);
    pts.push((p0.clone(), f0));
    for i in 0..n {
        let mut x = p0.clone();
        x[i] += step;
        pts.push(eval(&x));
    }
    let mut best = pts.iter().min_by(|a, b| a.1.total_cmp(&b.1)).cloned().unwrap();
    while evals.get() < max_evals && !stop(best.1) {
        pts.sort_by(|a, b| a.1.total_cmp(&b.1));
        if pts[n].1 - pts[0].1 <= ftol {
            break;
        }
        let centroid = pts[..n].iter().fold(DVector::zeros(n), |acc, p| acc + &p.0) / n as f64;
        let worst = pts[n].clone();
        let refl = eval(&(&centroid * 2.0 - &worst.0));
        if refl.1 < pts[0].1 {
            let exp = eval(&(&centroid * 3.0 - &worst.0 * 2.0));
            pts[n] = if exp.1 < refl.1 { exp } else { refl };
        } else if refl.1 < pts[n - 1].1 {
            pts[n] = refl;
        } else {
            let contr = if refl.1 < worst.1 {
                eval(&((&centroid + &refl.0) * 0.5))
            } else {
                eval(&((&centroid + &worst.0) * 0.5))
            };
            if contr.1 < worst.1.min(refl.1) {
                pts[n] = contr;
            } else {
                let b = pts[0].0.clone();
                for p in pts.iter_mut().skip(1) {
                    *p = eval(&((&b + &p.0) * 0.5));
                }
            }
        }
        for p in &pts {
            if p.1 < best.1 {
                best = p.clone();
            }
        }
    }
    Minimum { x: best.0, value: best.1, evaluations: evals.get() }
}
