//! Closed-form 1-D restrictions of the residual objectives along a rank-one
//! direction, and the cubic root-finder used to minimize the CARE quartic
//! exactly.

/// `φ(α) = f(X + α·vvᵀ)` in closed form. Each evaluation is O(1); the
/// coefficients cost O(n²) once.
#[derive(Clone, Debug)]
pub enum LineObjective {
    /// CARE: a quartic polynomial `c0 + c1·α + c2·α² + c3·α³ + c4·α⁴`.
    Quartic { c: [f64; 5] },
    /// NME: rational through `μ(α) = -α/(1+α)`, pole at `α = -1`:
    /// `f0 + 2α·vmv + 2μ·wmw + α²·v4 + μ²·w4 + 2αμ·vw2`.
    NmeRational {
        f0: f64,
        vmv: f64,
        wmw: f64,
        v4: f64,
        w4: f64,
        vw2: f64,
    },
    /// DARE: rational through `b1(α) = (1 + α·a2)⁻¹`, pole at `α = -1/a2`:
    /// `f0 + 2α·umu − 2α·b1·vmr + α²·u4 − 2α²·b1·a3·ur + α²·b1²·a4·r2`.
    DareRational {
        f0: f64,
        umu: f64,
        vmr: f64,
        u4: f64,
        a2: f64,
        a3: f64,
        ur: f64,
        a4: f64,
        r2: f64,
    },
}

impl LineObjective {
    /// Evaluate `φ(α)`. At a pole the result is non-finite; callers clip
    /// their search interval first. `φ(0)` equals the cached residual
    /// exactly.
    pub fn eval(&self, alpha: f64) -> f64 {
        match *self {
            LineObjective::Quartic { c } => {
                c[0] + alpha * (c[1] + alpha * (c[2] + alpha * (c[3] + alpha * c[4])))
            }
            LineObjective::NmeRational {
                f0,
                vmv,
                wmw,
                v4,
                w4,
                vw2,
            } => {
                let mu = -alpha / (1.0 + alpha);
                f0 + 2.0 * alpha * vmv
                    + 2.0 * mu * wmw
                    + alpha * alpha * v4
                    + mu * mu * w4
                    + 2.0 * alpha * mu * vw2
            }
            LineObjective::DareRational {
                f0,
                umu,
                vmr,
                u4,
                a2,
                a3,
                ur,
                a4,
                r2,
            } => {
                let b1 = 1.0 / (1.0 + alpha * a2);
                f0 + 2.0 * alpha * umu - 2.0 * alpha * b1 * vmr
                    + alpha * alpha * u4
                    - 2.0 * alpha * alpha * b1 * a3 * ur
                    + alpha * alpha * b1 * b1 * a4 * r2
            }
        }
    }

    /// Poles of `φ`, if any. The step-size search clips its interval to the
    /// pole-free component containing `α = 0`.
    pub fn poles(&self) -> Vec<f64> {
        match *self {
            LineObjective::Quartic { .. } => Vec::new(),
            LineObjective::NmeRational { .. } => vec![-1.0],
            LineObjective::DareRational { a2, .. } => {
                if a2 != 0.0 {
                    vec![-1.0 / a2]
                } else {
                    Vec::new()
                }
            }
        }
    }

    /// Stationary points available in closed form: the real roots of the
    /// derivative cubic for the CARE quartic, nothing for the rationals.
    pub fn stationary_points(&self) -> Vec<f64> {
        match *self {
            LineObjective::Quartic { c } => solve_cubic(4.0 * c[4], 3.0 * c[3], 2.0 * c[2], c[1]),
            _ => Vec::new(),
        }
    }
}

/// Real roots of `a·x³ + b·x² + c·x + d = 0`, degenerating gracefully to the
/// quadratic/linear cases. Trigonometric form for three real roots, Cardano
/// otherwise.
pub fn solve_cubic(a: f64, b: f64, c: f64, d: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
    if scale == 0.0 || !scale.is_finite() {
        return Vec::new();
    }
    if a.abs() <= 1e-14 * scale {
        // quadratic b·x² + c·x + d
        if b.abs() <= 1e-14 * scale {
            if c.abs() <= 1e-14 * scale {
                return Vec::new();
            }
            return vec![-d / c];
        }
        let disc = c * c - 4.0 * b * d;
        if disc < 0.0 {
            return Vec::new();
        }
        let sq = disc.sqrt();
        // numerically stable pair
        let q = -0.5 * (c + c.signum() * sq);
        let mut roots = vec![q / b];
        if q != 0.0 {
            roots.push(d / q);
        } else {
            roots.push(0.0);
        }
        return roots;
    }
    // depressed cubic t³ + p·t + q with x = t − b/(3a)
    let bn = b / a;
    let cn = c / a;
    let dn = d / a;
    let shift = bn / 3.0;
    let p = cn - bn * bn / 3.0;
    let q = 2.0 * bn * bn * bn / 27.0 - bn * cn / 3.0 + dn;
    let disc = (q / 2.0) * (q / 2.0) + (p / 3.0) * (p / 3.0) * (p / 3.0);
    let mut roots = Vec::with_capacity(3);
    if disc > 0.0 {
        let sq = disc.sqrt();
        let u = cbrt(-q / 2.0 + sq);
        let v = cbrt(-q / 2.0 - sq);
        roots.push(u + v - shift);
    } else if disc == 0.0 {
        let u = cbrt(-q / 2.0);
        roots.push(2.0 * u - shift);
        roots.push(-u - shift);
    } else {
        // three real roots
        let r = (-p / 3.0).powi(3).sqrt();
        let phi = (-q / (2.0 * r)).clamp(-1.0, 1.0).acos();
        let m = 2.0 * (-p / 3.0).sqrt();
        for k in 0..3 {
            roots.push(m * ((phi + 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos() - shift);
        }
    }
    roots.retain(|r| r.is_finite());
    roots
}

fn cbrt(x: f64) -> f64 {
    x.signum() * x.abs().powf(1.0 / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_roots(a: f64, b: f64, c: f64, d: f64, expected: &[f64]) {
        let mut got = solve_cubic(a, b, c, d);
        got.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut want = expected.to_vec();
        want.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(got.len(), want.len(), "{got:?} vs {want:?}");
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() <= 1e-9 * (1.0 + w.abs()), "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn cubic_three_real_roots() {
        // (x-1)(x-2)(x-3) = x³ - 6x² + 11x - 6
        assert_roots(1.0, -6.0, 11.0, -6.0, &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn cubic_single_real_root() {
        // x³ + x + 2 = 0 has root x = -1 (others complex)
        assert_roots(1.0, 0.0, 1.0, 2.0, &[-1.0]);
    }

    #[test]
    fn cubic_degenerates_to_quadratic() {
        assert_roots(0.0, 1.0, -3.0, 2.0, &[1.0, 2.0]);
    }

    #[test]
    fn quartic_eval_at_zero_is_constant_term() {
        let obj = LineObjective::Quartic {
            c: [7.5, -1.0, 2.0, 0.1, 0.3],
        };
        assert_eq!(obj.eval(0.0), 7.5);
    }

    #[test]
    fn rational_eval_at_zero_is_f0() {
        let obj = LineObjective::NmeRational {
            f0: 3.25,
            vmv: 1.0,
            wmw: -2.0,
            v4: 0.5,
            w4: 0.7,
            vw2: 0.1,
        };
        assert_eq!(obj.eval(0.0), 3.25);
        assert_eq!(obj.poles(), vec![-1.0]);
    }

    #[test]
    fn dare_pole_location() {
        let obj = LineObjective::DareRational {
            f0: 1.0,
            umu: 0.0,
            vmr: 3.0,
            u4: 0.0,
            a2: 2.0,
            a3: 0.0,
            ur: 0.0,
            a4: 1.0,
            r2: 1.0,
        };
        assert_eq!(obj.poles(), vec![-0.5]);
        assert!(obj.eval(-0.5 + 1e-13).abs() > 1e10);
        assert_eq!(obj.eval(0.0), 1.0);
    }
}
