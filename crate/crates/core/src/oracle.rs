//! Reference computations that avoid the solver's own code paths: dense
//! matrices instead of structured operators, grid and bisection searches
//! instead of closed forms. They are slow and meant for checking.

use nalgebra::{DMatrix, DVector};

use crate::linalg::Mat;
use crate::problem::ProblemInstance;
use crate::toolkit::{BoxSet, ProxFriendly, QuadraticFunction, SmoothBase, SmoothConjugable};

/// Dense `C_i = -[A_i^(1)T .. A_i^(N)T, 0 .. I .. 0]` assembled from the
/// constraint blocks of every agent.
pub fn dense_c(inst: &ProblemInstance<f64>, i: usize) -> DMatrix<f64> {
    let lay = inst.layout();
    let mut c = DMatrix::zeros(inst.m(), lay.len());
    for (l, a) in inst.agents().iter().enumerate() {
        if let Some(blk) = a.constraint.blocks.get(&i) {
            let t = blk.to_f64().transpose();
            let off = lay.theta(l).start;
            c.view_mut((0, off), (t.nrows(), t.ncols())).copy_from(&(-t));
        }
    }
    let off = lay.mu(i).start;
    for r in 0..inst.m() {
        c[(r, off + r)] = -1.0;
    }
    c
}

/// Stacked `[b^(1)..b^(N), 0..0]`, the gradient of `sum_i E_i lambda`.
fn stacked_rhs(inst: &ProblemInstance<f64>) -> DVector<f64> {
    let lay = inst.layout();
    let mut e = DVector::zeros(lay.len());
    for i in 0..inst.n_agents() {
        for (r, &v) in lay.theta(i).zip(&inst.agent(i).constraint.rhs) {
            e[r] = v;
        }
    }
    e
}

/// Prox with parameter `c` of the conjugate of an indicator-like `g + I_Omega`,
/// written out directly for boxes: `v - c * clamp(v / c)`.
fn box_conjugate_prox(b: &BoxSet<f64>, v: &[f64], c: f64) -> Vec<f64> {
    v.iter()
        .enumerate()
        .map(|(m, &x)| x - c * (x / c).max(b.lower()[m]).min(b.upper()[m]))
        .collect()
}

/// Straight-line DPG with dense `C_i`: `grad P = sum_i C_i^T x_hat_i + e`.
/// Supports agents whose `g + I_Omega` is a box indicator or zero on the
/// whole space. Returns `lambda(0..=iters)`.
pub fn dense_dpg_reference(
    inst: &ProblemInstance<f64>,
    c: f64,
    iters: usize,
) -> Result<Vec<Vec<f64>>, String> {
    let lay = inst.layout();
    let cs: Vec<DMatrix<f64>> = (0..inst.n_agents()).map(|i| dense_c(inst, i)).collect();
    let e = stacked_rhs(inst);
    let mut boxes = Vec::new();
    for a in inst.agents() {
        let b = match (&a.g, a.omega.as_box()) {
            (ProxFriendly::Zero, None) => None,
            (ProxFriendly::Zero, Some(b)) | (ProxFriendly::IndicatorBox(b), None) => Some(b.clone()),
            (ProxFriendly::IndicatorBox(b1), Some(b2)) => b1.intersect(b2),
            _ => return Err(format!("agent {}: g is not supported by the reference", a.id)),
        };
        boxes.push(b);
    }
    let mut lam = DVector::zeros(lay.len());
    let mut out = vec![lam.as_slice().to_vec()];
    for _ in 0..iters {
        let mut grad = e.clone();
        for (i, ci) in cs.iter().enumerate() {
            let u = ci * &lam;
            let x = inst
                .agent(i)
                .f
                .conjugate_argmax(u.as_slice())
                .map_err(|e| e.to_string())?;
            grad += ci.transpose() * DVector::from_vec(x);
        }
        let mut next = &lam - c * &grad;
        for (i, b) in boxes.iter().enumerate() {
            if let Some(b) = b {
                let r = lay.mu(i);
                let p = box_conjugate_prox(b, &next.as_slice()[r.clone()], c);
                for (k, v) in r.zip(p) {
                    next[k] = v;
                }
            }
        }
        lam = next;
        out.push(lam.as_slice().to_vec());
    }
    Ok(out)
}

/// `f^*(u)` for a quadratic on the whole space, `+inf` when unbounded,
/// through the normal equations.
fn quad_conjugate_whole(q: &QuadraticFunction<f64>, u: &[f64]) -> f64 {
    let qm = q.curvature().to_f64();
    let s = DVector::from_iterator(u.len(), u.iter().zip(q.linear()).map(|(a, b)| a - b));
    match qm.clone().cholesky() {
        Some(ch) => 0.5 * s.dot(&ch.solve(&s)) - q.offset(),
        None => f64::INFINITY,
    }
}

/// `sup_{x in [lo, hi]} u x - phi(x)` by golden-section search on a
/// concave objective.
pub fn golden_max(phi: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (phi(x1), phi(x2));
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = phi(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = phi(x1);
        }
    }
    let mut best = ((a + b) / 2.0, phi((a + b) / 2.0));
    for x in [lo, hi] {
        let v = phi(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

/// `f^*(u)` of a one-dimensional smooth part by golden section over its
/// box (or by the normal equations on the whole space).
pub fn conjugate_value_1d(f: &SmoothConjugable<f64>, u: f64) -> f64 {
    match (f.base(), f.domain().as_box()) {
        (SmoothBase::Quadratic(q), None) => quad_conjugate_whole(q, &[u]),
        (_, Some(b)) => {
            let fv = |x: f64| f.value(&[x]).to_scalar();
            golden_max(|x| u * x - fv(x), b.lower()[0], b.upper()[0], 1e-12).1
        }
        (SmoothBase::Utility(_), None) => f64::NAN,
    }
}

/// `Psi(lambda)` from dense `C_i`, with conjugates of quadratics from the
/// normal equations and support functions of boxes written out. Only
/// quadratic `f` on the whole space and box-indicator or zero `g` are
/// supported.
pub fn dense_psi(inst: &ProblemInstance<f64>, lambda: &[f64]) -> f64 {
    let lay = inst.layout();
    let lam = DVector::from_column_slice(lambda);
    let mut total = stacked_rhs(inst).dot(&lam);
    for (i, a) in inst.agents().iter().enumerate() {
        let u = dense_c(inst, i) * &lam;
        total += match a.f.base() {
            SmoothBase::Quadratic(q) if a.f.domain().as_box().is_none() => {
                quad_conjugate_whole(q, u.as_slice())
            }
            _ => return f64::NAN,
        };
        let mu = &lambda[lay.mu(i)];
        let b = match (&a.g, a.omega.as_box()) {
            (ProxFriendly::Zero, None) => None,
            (ProxFriendly::Zero, Some(b)) | (ProxFriendly::IndicatorBox(b), None) => Some(b.clone()),
            (ProxFriendly::IndicatorBox(b1), Some(b2)) => b1.intersect(b2),
            _ => return f64::NAN,
        };
        match b {
            None => {
                if mu.iter().any(|&v| v != 0.0) {
                    return f64::INFINITY;
                }
            }
            Some(b) => {
                for (m, &v) in mu.iter().enumerate() {
                    total += if v >= 0.0 { v * b.upper()[m] } else { v * b.lower()[m] };
                }
            }
        }
    }
    total
}

/// Coarse-to-fine grid minimization of `phi` over a box in `R^d`: each
/// level evaluates `points^d` nodes and shrinks the box around the best
/// one by `shrink`.
pub fn grid_minimize(
    phi: impl Fn(&[f64]) -> f64,
    lower: &[f64],
    upper: &[f64],
    points: usize,
    levels: usize,
    shrink: f64,
) -> (Vec<f64>, f64) {
    let d = lower.len();
    let mut lo = lower.to_vec();
    let mut hi = upper.to_vec();
    let mut best = (vec![0.0; d], f64::INFINITY);
    let mut idx = vec![0usize; d];
    for _ in 0..levels {
        idx.iter_mut().for_each(|v| *v = 0);
        loop {
            let x: Vec<f64> = (0..d)
                .map(|j| lo[j] + (hi[j] - lo[j]) * idx[j] as f64 / (points - 1) as f64)
                .collect();
            let v = phi(&x);
            if v < best.1 {
                best = (x, v);
            }
            let mut j = 0;
            while j < d {
                idx[j] += 1;
                if idx[j] < points {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == d {
                break;
            }
        }
        for j in 0..d {
            let half = (hi[j] - lo[j]) * shrink / 2.0;
            lo[j] = best.0[j] - half;
            hi[j] = best.0[j] + half;
        }
    }
    best
}

/// Minimizer of `sum_i 1/2 x^T Q x + q^T x` subject to `A x = b` from the
/// KKT system, solved by SVD so redundant rows are tolerated.
pub fn equality_qp(q: &Mat<f64>, lin: &[f64], a: &Mat<f64>, b: &[f64]) -> Vec<f64> {
    let n = lin.len();
    let r = a.rows();
    let mut k = DMatrix::zeros(n + r, n + r);
    let mut rhs = DVector::zeros(n + r);
    for i in 0..n {
        for j in 0..n {
            k[(i, j)] = q[(i, j)];
        }
        rhs[i] = -lin[i];
    }
    for i in 0..r {
        for j in 0..n {
            k[(n + i, j)] = a[(i, j)];
            k[(j, n + i)] = a[(i, j)];
        }
        rhs[n + i] = b[i];
    }
    let sol = k.svd(true, true).solve(&rhs, 1e-12).expect("svd solve");
    sol.as_slice()[..n].to_vec()
}

/// Interval of maximizers of `y z - h(z)` for one coordinate of a
/// separable catalog function, written independently of the toolkit.
fn coordinate_argmax(g: &ProxFriendly<f64>, m: usize, y: f64) -> (f64, f64) {
    let inf = f64::INFINITY;
    let l1_box = |w: f64, l: f64, u: f64| -> (f64, f64) {
        // y z - w |z| is piecewise linear with slopes y + w (z < 0) and y - w (z > 0)
        let mut cands: Vec<f64> = vec![l, u, 0.0f64.max(l).min(u)];
        cands.retain(|z| z.is_finite());
        let val = |z: f64| if z.is_finite() { y * z - w * z.abs() } else { f64::NAN };
        // unbounded directions
        if u == inf && y - w > 0.0 {
            return (inf, inf);
        }
        if l == -inf && y + w < 0.0 {
            return (-inf, -inf);
        }
        let best = cands.iter().map(|&z| val(z)).fold(f64::NEG_INFINITY, f64::max);
        let mut lo = inf;
        let mut hi = -inf;
        for &z in &cands {
            if val(z) >= best - 1e-300 {
                lo = lo.min(z);
                hi = hi.max(z);
            }
        }
        // flat pieces extend to infinite bounds
        if y - w == 0.0 && u == inf && hi >= 0.0 {
            hi = inf;
        }
        if y + w == 0.0 && l == -inf && lo <= 0.0 {
            lo = -inf;
        }
        (lo, hi)
    };
    match g {
        ProxFriendly::Zero => l1_box(0.0, -inf, inf),
        ProxFriendly::L1 { weight } => l1_box(*weight, -inf, inf),
        ProxFriendly::IndicatorBox(b) => l1_box(0.0, b.lower()[m], b.upper()[m]),
        ProxFriendly::L1PlusBox { weight, bounds } => {
            l1_box(*weight, bounds.lower()[m], bounds.upper()[m])
        }
        ProxFriendly::Quadratic(q) => {
            let d = q.curvature()[(m, m)];
            let s = y - q.linear()[m];
            if d > 0.0 {
                (s / d, s / d)
            } else if s > 0.0 {
                (inf, inf)
            } else if s < 0.0 {
                (-inf, -inf)
            } else {
                (-inf, inf)
            }
        }
    }
}

/// `prox^c` of `g^*` at `v`, computed without the Moreau decomposition:
/// coupled quadratics through `(Q^{-1} + I/c) w = Q^{-1} q + v/c`,
/// separable functions by bisection on the optimality condition
/// `0 in dg^*(w) + (w - v)/c` per coordinate, where `dg^*(w)` is the
/// interval of maximizers of `w z - g(z)`.
pub fn direct_conjugate_prox(g: &ProxFriendly<f64>, v: &[f64], c: f64) -> Vec<f64> {
    if let ProxFriendly::Quadratic(q) = g {
        if !q.is_separable() {
            let qi = q
                .curvature()
                .to_f64()
                .try_inverse()
                .expect("invertible curvature");
            let n = v.len();
            let lhs = &qi + DMatrix::identity(n, n) / c;
            let rhs = &qi * DVector::from_column_slice(q.linear()) + DVector::from_column_slice(v) / c;
            return lhs.lu().solve(&rhs).expect("solvable").as_slice().to_vec();
        }
    }
    (0..v.len())
        .map(|m| {
            let vm = v[m];
            // right derivative of the prox objective at w
            let slope = |w: f64| coordinate_argmax(g, m, w).1 + (w - vm) / c;
            let left_slope = |w: f64| coordinate_argmax(g, m, w).0 + (w - vm) / c;
            let (mut a, mut b) = (vm - 1e6, vm + 1e6);
            for _ in 0..400 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if slope(mid) < 0.0 {
                    a = mid;
                } else if left_slope(mid) > 0.0 {
                    b = mid;
                } else {
                    return mid;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// Central difference `(phi(u + h e_j) - phi(u - h e_j)) / 2h`.
pub fn central_difference(phi: impl Fn(&[f64]) -> f64, u: &[f64], h: f64) -> Vec<f64> {
    (0..u.len())
        .map(|j| {
            let mut p = u.to_vec();
            let mut q = u.to_vec();
            p[j] += h;
            q[j] -= h;
            (phi(&p) - phi(&q)) / (2.0 * h)
        })
        .collect()
}
