//! The linear operators L_mu, Lambda, T_mu and the explicit estimates on
//! their inverses: d_j / delta_j recursions, entrywise T^{-1} bounds, the
//! g-function, xi_mu, first-column norms, and rigorous application of
//! L_mu^{-1} to finitely supported vectors via the Schur complement and a
//! Sherman-Morrison tail correction.
//!
//! Index conventions follow the matrices: T(n) is n x n over rows/columns
//! 1..=n; L_mu acts on Chebyshev indices 0, 1, 2, ...

use crate::error::{Error, Result};
use crate::interval::{isum, IMatrix, Interval, IVector};

/// alpha_j(mu) = j + sqrt(j^2 + mu^2)
pub fn alpha(j: i64, mu: &Interval) -> Interval {
    let ji = Interval::point(j as f64);
    ji.add(&ji.square().add(&mu.square()).sqrt().unwrap())
}

/// Backward d and forward delta recursions for the truncation T(n).
#[derive(Debug, Clone)]
pub struct TridiagData {
    pub mu: Interval,
    pub n: usize,
    /// d[j-1] = d_j, j = 1..=n (d_n = 2n, d_j = 2j + mu^2/d_{j+1})
    pub d: Vec<Interval>,
    /// delta[j-1] = delta_j (delta_1 = 2, delta_j = 2j + mu^2/delta_{j-1})
    pub delta: Vec<Interval>,
}

pub(crate) fn dseq_raw(mu: &Interval, n: usize) -> TridiagData {
    assert!(n >= 1);
    let mu2 = mu.square();
    let mut d = vec![Interval::ZERO; n];
    d[n - 1] = Interval::point(2.0 * n as f64);
    for j in (1..n).rev() {
        d[j - 1] = Interval::point(2.0 * j as f64).add(&mu2.div(&d[j]));
    }
    let mut delta = vec![Interval::ZERO; n];
    delta[0] = Interval::point(2.0);
    for j in 2..=n {
        delta[j - 1] = Interval::point(2.0 * j as f64).add(&mu2.div(&delta[j - 2]));
    }
    TridiagData {
        mu: *mu,
        n,
        d,
        delta,
    }
}

/// Interval enclosures of the d_j / delta_j recursions. Requires
/// n > mu^2/4 so the monotonicity and alpha-sandwich enclosures of the
/// lemma hold (callers that only solve with T(n) use the raw recursion).
pub fn dseq(mu: &Interval, n: usize) -> Result<TridiagData> {
    if (n as f64) < mu.hi() * mu.hi() / 4.0 {
        return Err(Error::TruncationTooSmall { n, mu: mu.hi() });
    }
    Ok(dseq_raw(mu, n))
}

impl TridiagData {
    /// alpha_{j-1} <= d_j <= alpha_j for j >= 2, and
    /// sqrt(4+mu^2) <= d_1 <= 1 + sqrt(1+mu^2), as interval containments.
    pub fn alpha_sandwich_holds(&self) -> bool {
        for j in 2..=self.n {
            let lo = alpha(j as i64 - 1, &self.mu);
            let hi = alpha(j as i64, &self.mu);
            if self.d[j - 1].hi() < lo.lo() || self.d[j - 1].lo() > hi.hi() {
                return false;
            }
        }
        let lo = Interval::point(4.0).add(&self.mu.square()).sqrt().unwrap();
        let hi = Interval::ONE.add(&Interval::ONE.add(&self.mu.square()).sqrt().unwrap());
        !(self.d[0].hi() < lo.lo() || self.d[0].lo() > hi.hi())
    }
}

/// g(x) = mu (x ln(sqrt(x^2+1) + x) - sqrt(x^2+1) + 1), increasing in x >= 0.
pub fn g_eval(x: &Interval, mu: &Interval) -> Interval {
    assert!(x.lo() >= 0.0, "g requires x >= 0");
    let r = x.square().add(&Interval::ONE).sqrt().unwrap();
    let inner = x
        .mul(&r.add(x).ln().unwrap())
        .sub(&r)
        .add(&Interval::ONE);
    mu.mul(&inner)
}

/// Stable product mu^{e} / (d_{i} ... d_{j}) evaluated as interleaved
/// ratios mu/d (each at most ~1), avoiding overflow for long products.
fn mu_pow_over_d(mu: &Interval, d: &[Interval], i: usize, j: usize) -> Interval {
    debug_assert!(i >= 1 && i <= j && j <= d.len());
    let mut acc = Interval::ONE.div(&d[j - 1]);
    for l in i..j {
        acc = acc.mul(&mu.div(&d[l - 1]));
    }
    acc
}

/// Entrywise bounds on |T(n)^{-1}_{i,j}| (1-based indices):
/// upper = mu^{|j-i|} / (d_min..d_max product); for min(i,j) >= 2 the lower
/// is 2(min-1) mu^{|j-i|} / (d_{min-1}..d_max); for min = 1 the entry is
/// exactly mu^{j-1}/(d_1..d_j) up to sign.
pub fn tinv_entry_bounds(i: usize, j: usize, td: &TridiagData) -> Result<(Interval, Interval)> {
    let n = td.n;
    if i < 1 || j < 1 || i > n || j > n {
        return Err(Error::IndexError {
            index: i.max(j),
            len: n,
        });
    }
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    let upper = mu_pow_over_d(&td.mu, &td.d, a, b);
    let lower = if a >= 2 {
        upper.div(&td.d[a - 2]).scale(2.0 * (a as f64 - 1.0))
    } else {
        // |T^{-1}_{1,b}| = mu^{b-1}/(d_1..d_b) exactly
        upper
    };
    let lo = lower.lo().max(0.0).min(upper.hi());
    Ok((
        Interval::new(lo, lower.hi().min(upper.hi()).max(lo)),
        upper,
    ))
}

/// First-column norm estimates (asymptotic regime mu >= 4):
/// returns (lower bound on sum_i |T^{-1}_{i,1}|,
///          upper bound on sum_{i>N2} |T^{-1}_{i,1}|,
///          upper bound on sum_{i>N2} 2i |T^{-1}_{i,1}|).
pub fn tinv_col1_norm(mu: &Interval, n2: usize) -> Result<(Interval, Interval, Interval)> {
    if mu.lo() < 4.0 {
        return Err(Error::RegimeError {
            mu: mu.lo(),
            min: 4.0,
        });
    }
    let one = Interval::ONE;
    let two = Interval::point(2.0);
    let pi = Interval::with_ulps(std::f64::consts::PI, 1);
    let n2i = Interval::point(n2 as f64);
    let sqrt_4mu2 = Interval::point(4.0).add(&mu.square()).sqrt().unwrap();
    let d1_up = one.add(&one.add(&mu.square()).sqrt().unwrap()); // d_1 <= 1+sqrt(1+mu^2)

    // lower bound
    let g2mu = g_eval(&two.div(mu), mu);
    let lower = mu
        .mul(&g2mu.exp())
        .div(&d1_up)
        .mul(&pi.div(&two.mul(mu)).sqrt().unwrap().sub(&two.div(mu)));
    let lower = lower.max_i(&Interval::ZERO);

    // upper tail sum_{i > N2} |T^{-1}_{i,1}|
    let ratio = n2i.div(mu);
    let head = g_eval(&ratio, mu).neg().exp().div(&sqrt_4mu2);
    let tail = if ratio.hi() <= 0.5 {
        let e49 = n2i
            .square()
            .scale(0.49)
            .div(mu)
            .neg()
            .exp();
        let m1 = Interval::point(0.5);
        let m2 = pi.sqrt().unwrap().div(&mu.scale(0.49).sqrt().unwrap().scale(2.0));
        let t1 = e49.mul(&m1.min_i(&m2));
        let t2 = mu.scale(-0.115).exp().scale(0.6);
        let t3 = mu.scale(-0.55).exp().scale(2.0).div(mu);
        mu.div(&sqrt_4mu2).mul(&t1.add(&t2).add(&t3))
    } else if ratio.hi() <= 1.1 {
        let e46 = n2i.square().scale(0.46).div(mu).neg().exp();
        let m1 = Interval::point(0.6);
        let m2 = pi.sqrt().unwrap().div(&mu.scale(0.46).sqrt().unwrap().scale(2.0));
        let t1 = e46.mul(&m1.min_i(&m2));
        let t3 = mu.scale(-0.55).exp().scale(2.0).div(mu);
        mu.div(&sqrt_4mu2).mul(&t1.add(&t3))
    } else {
        n2i.scale(-0.55).exp().scale(2.0).div(&sqrt_4mu2)
    };
    let upper_tail = head.add(&tail);

    // weighted tail sum_{i > N2} 2i |T^{-1}_{i,1}|, with 1/d_1 <= 1/sqrt(4+mu^2)
    let d1_lo_inv = one.div(&sqrt_4mu2);
    let upper_weighted = if ratio.hi() <= 0.75 {
        let e479 = n2i.square().scale(0.479).div(mu).neg().exp();
        let e916 = mu.scale(0.479 * 9.0 / 16.0).neg().exp();
        let t1 = mu
            .scale(1.0 / 0.479)
            .mul(&d1_lo_inv)
            .mul(&e479.sub(&e916).max_i(&Interval::ZERO));
        let t2 = n2i.add(&one).scale(2.0).mul(&e479).mul(&d1_lo_inv);
        let t3 = mu
            .mul(&pi)
            .sqrt()
            .unwrap()
            .div(&Interval::point(0.479).sqrt().unwrap())
            .mul(&d1_lo_inv)
            .mul(&e479);
        let t4 = mu.mul(&e916).mul(&d1_lo_inv);
        t1.add(&t2).add(&t3).add(&t4)
    } else {
        let e916 = mu.scale(0.479 * 9.0 / 16.0).neg().exp();
        let base = mu.div(&one.add(&mu.scale(2.0)));
        let expo = n2i.sub(&mu.scale(0.75));
        let pow = base.ln().unwrap().mul(&expo).exp();
        mu.mul(&e916)
            .mul(&d1_lo_inv)
            .mul(&pow)
            .mul(&one.add(&mu.scale(2.0)))
            .div(&one.add(mu))
    };
    Ok((lower, upper_tail, upper_weighted))
}

/// Rigorous application of T^{-1} to a finitely supported vector via the
/// finite UL solve plus the Sherman-Morrison tail correction.
/// `v` is indexed 1..=v.len(); entries beyond are zero. Returns row
/// enclosures 1..=nn plus a bound on the l1 norm of rows > nn.
pub fn t_inv_apply(mu: &Interval, nn: usize, v: &[Interval]) -> (Vec<Interval>, Interval) {
    assert!(nn >= v.len() && nn >= 1);
    let td = dseq_raw(mu, nn);
    // y = T(nn)^{-1} v via U D^{-1} U^T factorization (da Fonseca):
    // solve U y1 = v backward, w = D y1, solve U^T x = w forward.
    let mut y1 = vec![Interval::ZERO; nn];
    for j in (1..=nn).rev() {
        let vj = if j <= v.len() {
            v[j - 1]
        } else {
            Interval::ZERO
        };
        let up = if j < nn {
            mu.mul(&y1[j]).add(&vj)
        } else {
            vj
        };
        y1[j - 1] = up.div(&td.d[j - 1]);
    }
    let mut y = vec![Interval::ZERO; nn];
    for j in 1..=nn {
        let w = td.d[j - 1].mul(&y1[j - 1]);
        let prev = if j > 1 {
            w.sub(&mu.mul(&y[j - 2]))
        } else {
            w
        };
        y[j - 1] = prev.div(&td.d[j - 1]);
    }
    // Sherman-Morrison correction for the infinite tail:
    // (T_inf^{-1})_{1,1} in [1/alpha_{nn+1}, 1/alpha_nn]
    let a_lo = alpha(nn as i64, mu);
    let a_hi = alpha(nn as i64 + 1, mu);
    let t_inf_11 = Interval::new(
        Interval::ONE.div(&a_hi).lo(),
        Interval::ONE.div(&a_lo).hi(),
    );
    // (T(nn)^{-1})_{nn,nn} = 1/delta_nn
    let t_nn = Interval::ONE.div(&td.delta[nn - 1]);
    let denom = Interval::ONE.add(&mu.square().mul(&t_inf_11).mul(&t_nn));
    let coef = mu.square().mul(&t_inf_11).div(&denom).mul(&y[nn - 1]);
    // (T(nn)^{-1})_{i,nn} = mu^{nn-i}/(delta_i..delta_nn)
    let mut x = vec![Interval::ZERO; nn];
    let mut colv = Interval::ONE.div(&td.delta[nn - 1]);
    for i in (1..=nn).rev() {
        if i < nn {
            colv = colv.mul(&mu.div(&td.delta[i - 1]));
        }
        x[i - 1] = y[i - 1].sub(&coef.mul(&colv));
    }
    // tail norm ||U_inf||_1 <= mu |y_nn| / denom * ||(T_inf^{-1})_{col 1}||_1
    let geo = mu.div(&a_hi);
    let tail_norm = if geo.hi() < 1.0 {
        let colnorm = Interval::ONE
            .div(&a_lo)
            .div(&Interval::ONE.sub(&geo));
        mu.mul(&y[nn - 1].abs()).div(&denom).mul(&colnorm)
    } else {
        // alpha > mu always, so this branch is unreachable
        unreachable!("alpha_{{nn+1}} <= mu cannot happen");
    };
    (x, tail_norm.max_i(&Interval::ZERO))
}

/// Enclosure of xi_mu = ||(T^{-1})_{col 1}||_1, valid for all mu >= 0.
/// For mu >= 4 the enclosure is intersected with the closed-form bounds of
/// the first-column lemma.
pub fn xi_mu_bounds(mu: &Interval) -> Interval {
    let pad = 48 + (6.0 * mu.hi().sqrt()).ceil() as usize;
    let (head, tail) = t_inv_apply(mu, 1 + pad, &[Interval::ONE]);
    let mut norm = Interval::ZERO;
    for h in &head {
        norm = norm.add(&h.abs());
    }
    let mut enc = Interval::new(norm.lo(), norm.add(&tail).hi());
    if mu.lo() >= 4.0 {
        if let Ok((lower, upper_tail, _)) = tinv_col1_norm(mu, 0) {
            let lemma = Interval::new(lower.lo().max(0.0), upper_tail.hi());
            if let Some(tight) = enc.intersect(&lemma) {
                enc = tight;
            }
        }
    }
    enc
}

/// Telescoped column tail: sum_{i>j} |(Lambda_0 T^{-1})_{i,j}| =
/// (T^{-1})_{j,j} - (T^{-1})_{j+1,j}, evaluated from the finite recursions.
pub fn lambda0_tinv_col_tailsum(td: &TridiagData, j: usize) -> Result<Interval> {
    if j < 1 || j >= td.n {
        return Err(Error::IndexError {
            index: j,
            len: td.n,
        });
    }
    // (T^{-1})_{jj} = (d_{j+1}..d_n)/(delta_j..delta_n)
    // (T^{-1})_{j+1,j} = -mu (d_{j+2}..d_n)/(delta_j..delta_n)
    // difference = (d_{j+2}..d_n)(d_{j+1}+mu)/(delta_j..delta_n)
    let mut acc = td.d[j].add(&td.mu).div(&td.delta[j - 1]);
    for l in j + 2..=td.n {
        acc = acc.mul(&td.d[l - 1].div(&td.delta[l - 2]));
    }
    acc = acc.div(&td.delta[td.n - 1]);
    Ok(acc.max_i(&Interval::ZERO))
}

/// Column bound ||(T^{-1} Lambda_0)_{col j}||_1 <= 7.82 / alpha_{j-1}(mu)
/// for mu >= 3000.
pub fn tinv_lambda0_col_bound(mu: &Interval, j: usize) -> Result<Interval> {
    if mu.lo() < 3000.0 {
        return Err(Error::RegimeError {
            mu: mu.lo(),
            min: 3000.0,
        });
    }
    assert!(j >= 1);
    Ok(Interval::point(7.82).div(&alpha(j as i64 - 1, mu)))
}

/// The assembled finite truncation of L_mu on Chebyshev rows 0..=n:
/// first row theta = (1, -2, 2, -2, ...), subdiagonal mu, diagonal 2n,
/// superdiagonal -mu.
pub fn lmu_matrix(mu: &Interval, n: usize) -> IMatrix {
    let mut m = IMatrix::zeros(n + 1, n + 1);
    for j in 0..=n {
        m[(0, j)] = if j == 0 {
            Interval::ONE
        } else if j % 2 == 1 {
            Interval::point(-2.0)
        } else {
            Interval::point(2.0)
        };
    }
    for i in 1..=n {
        m[(i, i)] = Interval::point(2.0 * i as f64);
        m[(i, i - 1)] = *mu;
        if i + 1 <= n {
            m[(i, i + 1)] = mu.neg();
        }
    }
    m
}

/// The operator Sigma (subdiagonal of ones); assembled for completeness,
/// no downstream computation consumes it.
pub fn sigma_matrix(n: usize) -> IMatrix {
    let mut m = IMatrix::zeros(n + 1, n + 1);
    for i in 1..=n {
        m[(i, i - 1)] = Interval::ONE;
    }
    m
}

/// Output of a rigorous L_mu^{-1} application: row enclosures 0..=head_len-1
/// plus a bound on sum of |entries| beyond the head.
#[derive(Debug, Clone)]
pub struct LmuSolve {
    pub head: Vec<Interval>,
    pub tail_l1: Interval,
}

/// First column of L_mu^{-1}: (1/(1+2 xi mu), -mu/(1+2 xi mu) (T^{-1})_{col 1}),
/// with certified W0-weighted l1 norm exactly 1 (Schur identity).
pub fn lmu_inv_first_col(mu: &Interval, head_len: usize) -> (LmuSolve, Interval) {
    assert!(head_len >= 1);
    let xi = xi_mu_bounds(mu);
    let schur = Interval::ONE.add(&xi.mul(mu).scale(2.0));
    let x0 = Interval::ONE.div(&schur);
    let pad = 32 + (6.0 * mu.hi().sqrt()).ceil() as usize;
    let nn = (head_len - 1).max(1) + pad;
    let (tcol, ttail) = t_inv_apply(mu, nn, &[Interval::ONE]);
    let factor = mu.div(&schur).neg();
    let mut head = vec![Interval::ZERO; head_len];
    head[0] = x0;
    for i in 1..head_len {
        head[i] = factor.mul(&tcol[i - 1]);
    }
    let mut tail = factor.abs().mul(&ttail);
    for i in head_len..=nn {
        tail = tail.add(&factor.abs().mul(&tcol[i - 1].abs()));
    }
    // ||W0 col||_1 = (1 + 2 mu xi)/(1 + 2 mu xi) = 1: single-variable range.
    let w0_norm = Interval::with_ulps(1.0, 1);
    debug_assert!({
        let naive = Interval::ONE
            .add(&xi.mul(mu).scale(2.0))
            .div(&schur);
        naive.contains(1.0)
    });
    (
        LmuSolve {
            head,
            tail_l1: tail,
        },
        w0_norm,
    )
}

/// Rigorous enclosure of L_mu^{-1} V for V supported on rows 0..support-1.
/// Returns head rows 0..head_len-1 and a tail bound on sum_{n >= head_len} |x_n|.
pub fn lmu_inv_apply(mu: &Interval, v: &[Interval], head_len: usize) -> LmuSolve {
    let support = v.len().max(1);
    let pad = 32 + (6.0 * mu.hi().sqrt()).ceil() as usize;
    let nn = support.max(head_len).max(2) + pad;
    // T-part right-hand side: rows 1.. of v
    let vt: Vec<Interval> = if v.len() > 1 {
        v[1..].to_vec()
    } else {
        vec![Interval::ZERO]
    };
    let (y, ytail) = t_inv_apply(mu, nn, &vt);
    // theta0^T y = sum 2(-1)^i y_i (theta0 over rows 1..)
    let mut th = Interval::ZERO;
    for (i, yi) in y.iter().enumerate() {
        let s = if (i + 1) % 2 == 1 { -2.0 } else { 2.0 };
        th = th.add(&yi.scale(s));
    }
    th = th.add(&Interval::new(-1.0, 1.0).scale(2.0).mul(&ytail));
    let xi = xi_mu_bounds(mu);
    let schur = Interval::ONE.add(&xi.mul(mu).scale(2.0));
    let v0 = if !v.is_empty() { v[0] } else { Interval::ZERO };
    let x0 = v0.sub(&th).div(&schur);
    // x_T = y - mu x0 (T^{-1})_{col 1}
    let (tcol, tcoltail) = t_inv_apply(mu, nn, &[Interval::ONE]);
    let c = mu.mul(&x0);
    let mut head = vec![Interval::ZERO; head_len];
    head[0] = x0;
    for i in 1..head_len {
        head[i] = y[i - 1].sub(&c.mul(&tcol[i - 1]));
    }
    let mut tail = ytail.add(&c.abs().mul(&tcoltail));
    for i in head_len..=nn {
        tail = tail.add(&y[i - 1].abs().add(&c.abs().mul(&tcol[i - 1].abs())));
    }
    LmuSolve {
        head,
        tail_l1: tail.max_i(&Interval::ZERO),
    }
}

/// Residual audit: rows 1..head-1 of L_mu * x must contain v (used in tests
/// and debug checks).
pub fn lmu_residual_check(mu: &Interval, v: &[Interval], sol: &LmuSolve) -> bool {
    let h = sol.head.len();
    for n in 1..h - 1 {
        let want = if n < v.len() { v[n] } else { Interval::ZERO };
        let got = mu
            .mul(&sol.head[n - 1])
            .add(&sol.head[n].scale(2.0 * n as f64))
            .sub(&mu.mul(&sol.head[n + 1]));
        // widen by the coupling into the unknown rows
        let slack = if n + 1 >= h - 1 {
            mu.abs().mul(&sol.tail_l1).hi()
        } else {
            0.0
        };
        if !(got.lo() - slack <= want.hi() && want.lo() <= got.hi() + slack) {
            return false;
        }
    }
    true
}
