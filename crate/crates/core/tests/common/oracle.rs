//! Slow, independent reference computations. Nothing here calls into the library
//! under test; inputs are plain nested vectors.

#![allow(dead_code)]

pub type Dense = Vec<Vec<f64>>;

pub fn dense_from_sets(n_cols: usize, rows: &[Vec<u32>]) -> Dense {
    rows.iter()
        .map(|r| {
            let mut v = vec![0.0; n_cols];
            for &c in r {
                v[c as usize] = 1.0;
            }
            v
        })
        .collect()
}

fn transpose(a: &Dense) -> Dense {
    let (m, n) = (a.len(), a.first().map_or(0, Vec::len));
    (0..n).map(|j| (0..m).map(|i| a[i][j]).collect()).collect()
}

/// Thin SVD by one-sided Jacobi rotations. Returns `(u, sigma, v)` with `u` as
/// `m × p`, `v` as `n × p`, `p = min(m, n)`, singular values non-increasing.
pub fn jacobi_svd(a: &Dense) -> (Dense, Vec<f64>, Dense) {
    let m = a.len();
    let n = a[0].len();
    if m < n {
        let (u, s, v) = jacobi_svd(&transpose(a));
        return (v, s, u);
    }
    // columns of `w` converge to u_k σ_k, columns of `v` to v_k
    let mut w: Dense = transpose(a);
    let mut v: Dense = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for _sweep in 0..80 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = w[p].iter().map(|x| x * x).sum();
                let beta: f64 = w[q].iter().map(|x| x * x).sum();
                let gamma: f64 = w[p].iter().zip(&w[q]).map(|(x, y)| x * y).sum();
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                off = off.max(gamma.abs() / (alpha * beta).sqrt());
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..m {
                    let (x, y) = (w[p][k], w[q][k]);
                    w[p][k] = c * x - s * y;
                    w[q][k] = s * x + c * y;
                }
                for k in 0..n {
                    let (x, y) = (v[p][k], v[q][k]);
                    v[p][k] = c * x - s * y;
                    v[q][k] = s * x + c * y;
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = w.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let sigma: Vec<f64> = order.iter().map(|&k| norms[k]).collect();
    let u_cols: Dense = order
        .iter()
        .map(|&k| {
            let s = norms[k];
            w[k].iter().map(|x| if s > 0.0 { x / s } else { 0.0 }).collect()
        })
        .collect();
    let v_cols: Dense = order.iter().map(|&k| v[k].clone()).collect();
    (transpose(&u_cols), sigma, transpose(&v_cols))
}

/// Best rank-`r` approximation `Σ_{k<r} σ_k u_k v_kᵀ` from an oracle SVD.
pub fn rank_r_approx(u: &Dense, s: &[f64], v: &Dense, r: usize) -> Dense {
    let m = u.len();
    let n = v.len();
    (0..m)
        .map(|i| (0..n).map(|j| (0..r).map(|k| u[i][k] * s[k] * v[j][k]).sum()).collect())
        .collect()
}

pub fn frobenius_diff(a: &Dense, b: &Dense) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)))
        .sum::<f64>()
        .sqrt()
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = ((r as u128 * b as u128) % p as u128) as u64;
        }
        b = ((b as u128 * b as u128) % p as u128) as u64;
        e >>= 1;
    }
    r
}

/// Rank of a 0/1 matrix over GF(p) by Gaussian elimination.
pub fn rank_mod_p(rows: &[Vec<u32>], n_cols: usize, p: u64) -> usize {
    let mut a: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| {
            let mut v = vec![0u64; n_cols];
            for &c in r {
                v[c as usize] = 1;
            }
            v
        })
        .collect();
    let mut rank = 0;
    for col in 0..n_cols {
        let Some(piv) = (rank..a.len()).find(|&i| a[i][col] != 0) else {
            continue;
        };
        a.swap(rank, piv);
        let inv = pow_mod(a[rank][col], p - 2, p);
        for i in 0..a.len() {
            if i != rank && a[i][col] != 0 {
                let f = ((a[i][col] as u128 * inv as u128) % p as u128) as u64;
                for j in col..n_cols {
                    let sub = ((f as u128 * a[rank][j] as u128) % p as u128) as u64;
                    a[i][j] = (a[i][j] + p - sub) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Rank over the rationals, bounded below by the rank modulo any prime; two large
/// primes make a wrong answer vanishingly unlikely.
pub fn exact_rank(rows: &[Vec<u32>], n_cols: usize) -> usize {
    rank_mod_p(rows, n_cols, 2_305_843_009_213_693_951).max(rank_mod_p(rows, n_cols, 1_000_000_007))
}

/// Softmax regression by plain fixed-step gradient descent, starting from zero.
/// Returns `(weights k × d, bias)`.
pub fn reference_logreg(x: &Dense, y: &[usize], k: usize, l2: f64, step: f64, iters: usize) -> (Dense, Vec<f64>) {
    let n = x.len();
    let d = x[0].len();
    let mut w = vec![vec![0.0; d]; k];
    let mut b = vec![0.0; k];
    for _ in 0..iters {
        let mut gw = vec![vec![0.0; d]; k];
        let mut gb = vec![0.0; k];
        for i in 0..n {
            let z: Vec<f64> = (0..k)
                .map(|c| b[c] + (0..d).map(|j| w[c][j] * x[i][j]).sum::<f64>())
                .collect();
            let mx = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let e: Vec<f64> = z.iter().map(|v| (v - mx).exp()).collect();
            let tot: f64 = e.iter().sum();
            for c in 0..k {
                let g = e[c] / tot - if c == y[i] { 1.0 } else { 0.0 };
                gb[c] += g / n as f64;
                for j in 0..d {
                    gw[c][j] += g * x[i][j] / n as f64;
                }
            }
        }
        for c in 0..k {
            b[c] -= step * gb[c];
            for j in 0..d {
                w[c][j] -= step * (gw[c][j] + l2 * w[c][j]);
            }
        }
    }
    (w, b)
}

pub fn reference_predict(w: &Dense, b: &[f64], x: &[f64]) -> usize {
    let mut best = 0;
    let mut best_z = f64::NEG_INFINITY;
    for c in 0..w.len() {
        let z = b[c] + w[c].iter().zip(x).map(|(p, q)| p * q).sum::<f64>();
        if z > best_z {
            best_z = z;
            best = c;
        }
    }
    best
}

/// Best training accuracy of any threshold rule `score > t` or `score < t`, scanning
/// every midpoint between consecutive distinct scores plus both extremes.
pub fn best_threshold_accuracy(scores: &[f64], truth: &[bool]) -> f64 {
    let mut sorted: Vec<f64> = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let mut cands = vec![sorted[0] - 1.0, sorted[sorted.len() - 1] + 1.0];
    cands.extend(sorted.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    let n = scores.len() as f64;
    let mut best = 0.0f64;
    for t in cands {
        let above = scores.iter().zip(truth).filter(|(s, y)| (**s > t) == **y).count() as f64;
        let below = scores.iter().zip(truth).filter(|(s, y)| (**s < t) == **y).count() as f64;
        best = best.max(above / n).max(below / n);
    }
    best
}

/// `a·b / (‖a‖‖b‖)` on dense 0/1 vectors.
pub fn dense_cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Per-group mean of row L1 losses between `a` and its rank-`r` oracle approximation.
pub fn group_mean_losses(a: &Dense, r: usize, groups: &[usize], n_groups: usize) -> Vec<f64> {
    let (u, s, v) = jacobi_svd(a);
    let approx = rank_r_approx(&u, &s, &v, r);
    let mut sum = vec![0.0; n_groups];
    let mut count = vec![0usize; n_groups];
    for i in 0..a.len() {
        let loss: f64 = a[i].iter().zip(&approx[i]).map(|(x, y)| (x - y).abs()).sum();
        sum[groups[i]] += loss;
        count[groups[i]] += 1;
    }
    sum.iter().zip(&count).map(|(s, &c)| s / c as f64).collect()
}
