//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's geometry; it only reuses plain data types.

#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use lamcert::lattice::{FlatTorusLattice, Vec2};
use lamcert::tube::{TubePath, TubePoint};
use rand::Rng;

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Length of the coordinate-linear segment in the metric
/// `dr² + sinh²r dθ² + cosh²r dz²`.
pub fn segment_length(a: TubePoint, b: TubePoint) -> f64 {
    let (dr, dt, dz) = (b.r - a.r, b.theta - a.theta, b.z - a.z);
    let speed = |s: f64| {
        let r = a.r + s * dr;
        (dr * dr + (r.sinh() * dt).powi(2) + (r.cosh() * dz).powi(2)).sqrt()
    };
    simpson(speed, 0.0, 1.0, 4000)
}

pub fn path_length(p: &TubePath) -> f64 {
    p.points.windows(2).map(|w| segment_length(w[0], w[1])).sum()
}

/// Length of a coordinate-linear segment on the torus of radius `r`.
pub fn flat_segment(r: f64, dt: f64, dz: f64) -> f64 {
    (r.sinh() * dt).hypot(r.cosh() * dz)
}

fn point(r: f64, theta: f64, z: f64) -> [f64; 4] {
    [
        r.cosh() * z.cosh(),
        r.cosh() * z.sinh(),
        r.sinh() * theta.cos(),
        r.sinh() * theta.sin(),
    ]
}

fn minkowski(x: [f64; 4], y: [f64; 4]) -> f64 {
    x[0] * y[0] - x[1] * y[1] - x[2] * y[2] - x[3] * y[3]
}

pub fn h3_distance(a: (f64, f64, f64), b: (f64, f64, f64)) -> f64 {
    let c = minkowski(point(a.0, a.1, a.2), point(b.0, b.1, b.2));
    c.max(1.0).acosh()
}

/// Smallest displacement of the loxodromic `(θ, z) ↦ (θ + kθ₀, z + kε)` over
/// points at radius in `[0, rmax]`, by golden-section search on the
/// hyperboloid distance.
pub fn min_displacement(eps: f64, theta0: f64, k: i64, rmax: f64) -> f64 {
    let disp = |r: f64| h3_distance((r, 0.3, 0.1), (r, 0.3 + k as f64 * theta0, 0.1 + k as f64 * eps));
    let (mut a, mut b) = (0.0, rmax);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let (c, d) = (b - g * (b - a), a + g * (b - a));
        if disp(c) <= disp(d) {
            b = d;
        } else {
            a = c;
        }
    }
    disp(a).min(disp(0.0))
}

/// Geodesic length from `a` to `b` by shooting: RK4 on the geodesic equation
/// `X'' = −⟨X', X'⟩ X` of the hyperboloid (no coordinate singularity on the
/// axis), with the initial velocity given in cylindrical components. The
/// target is moved from `a` to `b` in stages; each stage is solved by Newton
/// with a finite-difference Jacobian and step halving, starting from the last.
pub fn shooting_length(a: TubePoint, b: TubePoint, steps: usize) -> Option<f64> {
    let mut dt = (b.theta - a.theta).rem_euclid(TAU);
    if dt > PI {
        dt -= TAU;
    }
    let x0 = point(a.r, a.theta, a.z);
    let (sr, cr, st, ct, sz, cz) = (a.r.sinh(), a.r.cosh(), a.theta.sin(), a.theta.cos(), a.z.sinh(), a.z.cosh());
    // columns ∂/∂r, ∂/∂θ, ∂/∂z of the embedding
    let jac = [
        [sr * cz, 0.0, cr * sz],
        [sr * sz, 0.0, cr * cz],
        [cr * ct, -sr * st, 0.0],
        [cr * st, sr * ct, 0.0],
    ];
    let velocity = |c: [f64; 3]| -> [f64; 4] {
        let mut v = [0.0; 4];
        for (i, row) in jac.iter().enumerate() {
            v[i] = row[0] * c[0] + row[1] * c[1] + row[2] * c[2];
        }
        v
    };
    let norm = |r: [f64; 3]| r.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let stages = 16;
    let mut c = [0.0; 3];
    for stage in 1..=stages {
        let f = stage as f64 / stages as f64;
        let target = point(a.r + f * (b.r - a.r), a.theta + f * dt, a.z + f * (b.z - a.z));
        let shoot = |c: [f64; 3]| -> Option<[f64; 3]> {
            let x = integrate(x0, velocity(c), steps)?;
            Some([x[1] - target[1], x[2] - target[2], x[3] - target[3]])
        };
        if stage > 1 {
            let k = f / ((stage - 1) as f64 / stages as f64);
            c = [c[0] * k, c[1] * k, c[2] * k];
        } else {
            c = [f * (b.r - a.r), f * dt, f * (b.z - a.z)];
        }
        let tol = 1e-13 * target.iter().map(|x| x.abs()).fold(1.0, f64::max);
        let mut converged = false;
        for _ in 0..50 {
            let res = shoot(c)?;
            let err = norm(res);
            if err < tol {
                converged = true;
                break;
            }
            let h = 1e-7;
            let mut m = [[0.0; 3]; 3];
            for j in 0..3 {
                let mut w = c;
                w[j] += h;
                let e = shoot(w)?;
                for i in 0..3 {
                    m[i][j] = (e[i] - res[i]) / h;
                }
            }
            let step = solve3(m, res)?;
            let mut lambda = 1.0;
            loop {
                let w = [c[0] - lambda * step[0], c[1] - lambda * step[1], c[2] - lambda * step[2]];
                if shoot(w).is_some_and(|r| norm(r) < err) {
                    c = w;
                    break;
                }
                lambda /= 2.0;
                if lambda < 1e-6 {
                    // rounding floor reached
                    converged = err < 1e3 * tol;
                    break;
                }
            }
            if lambda < 1e-6 {
                break;
            }
        }
        if !converged {
            return None;
        }
    }
    let v = velocity(c);
    Some((-minkowski(v, v)).max(0.0).sqrt())
}

fn integrate(mut x: [f64; 4], mut v: [f64; 4], steps: usize) -> Option<[f64; 4]> {
    let acc = |x: [f64; 4], v: [f64; 4]| {
        let s = -minkowski(v, v);
        [s * x[0], s * x[1], s * x[2], s * x[3]]
    };
    let h = 1.0 / steps as f64;
    let shift = |x: [f64; 4], d: [f64; 4], s: f64| [x[0] + s * d[0], x[1] + s * d[1], x[2] + s * d[2], x[3] + s * d[3]];
    for _ in 0..steps {
        let (k1x, k1v) = (v, acc(x, v));
        let (x2, v2) = (shift(x, k1x, h / 2.0), shift(v, k1v, h / 2.0));
        let (k2x, k2v) = (v2, acc(x2, v2));
        let (x3, v3) = (shift(x, k2x, h / 2.0), shift(v, k2v, h / 2.0));
        let (k3x, k3v) = (v3, acc(x3, v3));
        let (x4, v4) = (shift(x, k3x, h), shift(v, k3v, h));
        let (k4x, k4v) = (v4, acc(x4, v4));
        for i in 0..4 {
            x[i] += h / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
            v[i] += h / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
        }
        if x.iter().chain(v.iter()).any(|c| !c.is_finite()) {
            return None;
        }
    }
    Some(x)
}

fn solve3(m: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det3 = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det3(m);
    if d.abs() < 1e-300 {
        return None;
    }
    let mut out = [0.0; 3];
    for (j, o) in out.iter_mut().enumerate() {
        let mut mj = m;
        for i in 0..3 {
            mj[i][j] = b[i];
        }
        *o = det3(mj) / d;
    }
    Some(out)
}

fn vec_of(v1: Vec2, v2: Vec2, p: i64, q: i64) -> Vec2 {
    [p as f64 * v1[0] + q as f64 * v2[0], p as f64 * v1[1] + q as f64 * v2[1]]
}

/// Gauss reduction written out directly; returns a basis with `|b1| ≤ |b2|`.
pub fn gauss_reduce(mut b1: Vec2, mut b2: Vec2) -> (Vec2, Vec2) {
    let n = |v: Vec2| v[0] * v[0] + v[1] * v[1];
    loop {
        if n(b1) > n(b2) {
            std::mem::swap(&mut b1, &mut b2);
        }
        let mu = ((b1[0] * b2[0] + b1[1] * b2[1]) / n(b1)).round();
        if mu == 0.0 {
            return (b1, b2);
        }
        b2 = [b2[0] - mu * b1[0], b2[1] - mu * b1[1]];
    }
}

/// Shortest nonzero vector length over coefficients `|p|, |q| ≤ w` in the
/// reduced basis.
pub fn brute_shortest(lat: &FlatTorusLattice, w: i64) -> f64 {
    let (b1, b2) = gauss_reduce(lat.v1(), lat.v2());
    let mut best = f64::INFINITY;
    for p in -w..=w {
        for q in -w..=w {
            if (p, q) != (0, 0) {
                let v = vec_of(b1, b2, p, q);
                best = best.min(v[0] * v[0] + v[1] * v[1]);
            }
        }
    }
    best.sqrt()
}

/// Lower bound on the covering radius from an `n × n` grid over the reduced
/// fundamental cell, and the grid gap that bounds the error.
pub fn grid_covering(lat: &FlatTorusLattice, n: usize) -> (f64, f64) {
    let (b1, b2) = gauss_reduce(lat.v1(), lat.v2());
    let mut lo = 0.0f64;
    for i in 0..=n {
        for j in 0..=n {
            let (s, t) = (i as f64 / n as f64, j as f64 / n as f64);
            let x = [s * b1[0] + t * b2[0], s * b1[1] + t * b2[1]];
            let mut d = f64::INFINITY;
            for p in -2..=3 {
                for q in -2..=3 {
                    let l = vec_of(b1, b2, p, q);
                    d = d.min((x[0] - l[0]).powi(2) + (x[1] - l[1]).powi(2));
                }
            }
            lo = lo.max(d.sqrt());
        }
    }
    let diag = vec_of(b1, b2, 1, 1);
    let anti = vec_of(b1, b2, 1, -1);
    let gap = 0.5 * diag[0].hypot(diag[1]).max(anti[0].hypot(anti[1])) / n as f64;
    (lo, gap)
}

/// A random lattice: generic skewed bases with bounded aspect.
pub fn random_lattice(rng: &mut impl Rng) -> FlatTorusLattice {
    loop {
        let v1: [f64; 2] = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
        let v2: [f64; 2] = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
        let det = v1[0] * v2[1] - v1[1] * v2[0];
        let (n1, n2) = (v1[0].hypot(v1[1]), v2[0].hypot(v2[1]));
        if det.abs() > 0.02 * n1 * n2 && n1 > 0.05 && n2 > 0.05 {
            // shear by a random unimodular matrix so reduction has work to do
            let k = rng.random_range(-20..=20) as f64;
            let w2 = [v2[0] + k * v1[0], v2[1] + k * v1[1]];
            return FlatTorusLattice::new(v1, w2).unwrap();
        }
    }
}
