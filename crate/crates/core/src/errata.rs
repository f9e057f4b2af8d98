//! Known errors in the published formulas, each with a numeric check showing
//! that the printed form fails and the implemented form holds.

use serde::Serialize;

use crate::dynamics::closed_form::closed_form_params;
use crate::dynamics::ntk::ntk;
use crate::dynamics::pq::{printed_first_layer, to_pq};
use crate::model::{model_output, reduce_dataset, EffectiveData, Hyperparams, RawDataset, Reduction, WeightState};
use crate::oracle::flow::gradient_flow_rhs;
use crate::scalar::dot;

#[derive(Debug, Clone, Serialize)]
pub struct Erratum {
    pub topic: &'static str,
    pub printed: &'static str,
    pub implemented: &'static str,
    /// Defect of the printed form on a test instance; zero means it agrees.
    pub printed_defect: f64,
    /// Same check for the implemented form.
    pub implemented_defect: f64,
}

impl Erratum {
    /// The printed form is wrong and the implemented one is right.
    pub fn confirmed(&self) -> bool {
        self.printed_defect > 1e-6 && self.implemented_defect < 1e-9
    }
}

fn worked() -> (WeightState<f64>, EffectiveData<f64>, Hyperparams<f64>) {
    (
        WeightState::new(vec![0.0], vec![vec![1.0]]),
        EffectiveData::from_point(vec![1.0], 1.0).expect("valid"),
        Hyperparams::linear(1.0, 1.0, 1, 1).expect("valid"),
    )
}

fn first_layer() -> Erratum {
    let (s, data, hp) = worked();
    let pq = to_pq(&s, &data, &hp).expect("valid");
    let printed = printed_first_layer(&s.w, &pq, &data, &hp);
    let fixed = crate::dynamics::pq::from_pq(&pq, &data, &hp, 0.0).expect("valid");
    Erratum {
        topic: "first-layer reconstruction",
        printed: "w_ij(t) = w_ij(0) + (p_i(t) + q_i(t)) x_j / (sqrt(eta_u) rho)",
        implemented: "W_i(t) = w_orth_i + (p_i(t) + q_i(t)) x / (sqrt(eta_u) ||x||)",
        printed_defect: (printed[0][0] - s.w[0][0]).abs(),
        implemented_defect: (fixed.w[0][0] - s.w[0][0]).abs(),
    }
}

fn root_product() -> Erratum {
    let (s, data, hp) = worked();
    let pq = to_pq(&s, &data, &hp).expect("valid");
    let c = closed_form_params(&pq, &data, &hp).expect("valid");
    let prod = c.alpha_plus.expect("P > 0") * c.alpha_minus.expect("P > 0");
    let ratio = c.q_stat / c.p_stat;
    Erratum {
        topic: "product of the asymptotic scale factors",
        printed: "alpha_+ alpha_- = Q/P",
        implemented: "alpha_+ alpha_- = -Q/P",
        printed_defect: (prod - ratio).abs(),
        implemented_defect: (prod + ratio).abs(),
    }
}

fn xi_prefactor() -> Erratum {
    // residual of dA/dt = −4(kPA² − bA − kQ) at t = t_c/2, five-point derivative
    let (s, data, hp) = worked();
    let pq = to_pq(&s, &data, &hp).expect("valid");
    let c = closed_form_params(&pq, &data, &hp).expect("valid");
    let (ap, am) = (c.alpha_plus.expect("P > 0"), c.alpha_minus.expect("P > 0"));
    let printed = |t: f64| {
        let xi = (1.0 - ap) / (1.0 + am) * (-4.0 * t / c.t_c).exp();
        (ap + xi * am) / (1.0 - xi)
    };
    let fixed = |t: f64| c.scale_factor(t).expect("P > 0");
    let residual = |a: &dyn Fn(f64) -> f64| {
        let (t, h) = (0.5 * c.t_c, 1e-3);
        let da = (a(t - 2.0 * h) - 8.0 * a(t - h) + 8.0 * a(t + h) - a(t + 2.0 * h)) / (12.0 * h);
        let v = a(t);
        (da + 4.0 * (c.coupling * c.p_stat * v * v - c.drive * v - c.coupling * c.q_stat)).abs()
    };
    Erratum {
        topic: "time dependence of the scale factor",
        printed: "xi(t) = (1 - alpha_+)/(1 + alpha_-) e^{-4t/t_c}, alpha = (alpha_+ + xi alpha_-)/(1 - xi)",
        implemented: "xi(t) = (1 - alpha_+)/(1 - alpha_-) e^{-4t/t_c}, alpha = alpha_+ + xi (alpha_+ - alpha_-)/(1 - xi)",
        printed_defect: residual(&printed),
        implemented_defect: residual(&fixed),
    }
}

fn abc_symmetry() -> Erratum {
    use crate::phase::{abc_transform, stability_exponent, Scaling};
    use num_traits::ToPrimitive;
    let s = Scaling::Ntk.base();
    let theta = crate::Rational64::from_integer(1);
    let mut printed = abc_transform(&s, theta);
    printed.c_u -= theta;
    printed.c_w -= theta;
    let shift = |t: &crate::phase::ScalingExponents| {
        (stability_exponent(t) - stability_exponent(&s)).to_f64().expect("finite").abs()
    };
    Erratum {
        topic: "abc symmetry acting on variance exponents",
        printed: "c_u -> c_u + theta, c_w -> c_w + theta, c_gamma -> c_gamma - 2 theta, c_eta -> c_eta + 2 theta",
        implemented: "c_u -> c_u + 2 theta, c_w -> c_w + 2 theta, c_gamma -> c_gamma - 2 theta, c_eta -> c_eta + 2 theta",
        printed_defect: shift(&printed),
        implemented_defect: shift(&abc_transform(&s, theta)),
    }
}

fn pq_scale() -> Erratum {
    // d/dt (p q) with the p/q transform scaled by a given length
    let data = EffectiveData::from_point(vec![1.0, 2.0], 0.5).expect("valid");
    let hp = Hyperparams::linear(1.0, 1.0, 1, 2).expect("valid");
    let s = WeightState::new(vec![0.3], vec![vec![0.4, 0.2]]);
    let (du, dw) = gradient_flow_rhs(&s, &data, &hp).expect("valid");
    let rate = |scale: f64| {
        let h = dot(&s.w[0], &data.x);
        let dh = dot(&dw[0], &data.x);
        let p = (h + scale * s.u[0]) / (2.0 * scale);
        let q = (h - scale * s.u[0]) / (2.0 * scale);
        let dp = (dh + scale * du[0]) / (2.0 * scale);
        let dq = (dh - scale * du[0]) / (2.0 * scale);
        (dp * q + p * dq).abs()
    };
    Erratum {
        topic: "length scale of the p/q transform for d0 > 1",
        printed: "rho = sqrt(sum_j x_j^2 / d0)",
        implemented: "||x|| = sqrt(sum_j x_j^2)",
        printed_defect: rate(data.rho),
        implemented_defect: rate(data.norm()),
    }
}

fn reduction_power() -> Erratum {
    // gradient in u of the full loss against the reduced loss, β = 2
    let raw = RawDataset::new(vec![1.0], vec![(1.0, 1.0), (2.0, 4.0)]).expect("valid");
    let hp = Hyperparams::new(1.0, 1.0, 1.0, 2, 1, 1).expect("valid");
    let s = WeightState::new(vec![0.7], vec![vec![0.9]]);
    let full: f64 = raw
        .samples
        .iter()
        .map(|&(a, y)| {
            let h = s.w[0][0] * a;
            2.0 * (model_output(&s, &[a], &hp) - y) * h * h
        })
        .sum::<f64>()
        / raw.samples.len() as f64;
    let reduced = |data: &EffectiveData<f64>| {
        let h = s.w[0][0] * data.x[0];
        2.0 * (model_output(&s, &data.x, &hp) - data.y) * h * h
    };
    let fixed = reduce_dataset(&raw, &hp, Reduction::Mean).expect("valid");
    let mut printed = fixed.clone();
    printed.x = vec![8.5f64.sqrt()];
    Erratum {
        topic: "input scale of the dataset reduction for beta >= 2",
        printed: "x = sqrt(E[a^{2 beta}]) n",
        implemented: "x = E[a^{2 beta}]^{1/(2 beta)} n",
        printed_defect: (reduced(&printed) - full).abs(),
        implemented_defect: (reduced(&fixed) - full).abs(),
    }
}

fn kernel_rates() -> Erratum {
    let data = EffectiveData::from_point(vec![0.6, -0.9], 0.4).expect("valid");
    let hp = Hyperparams::new(0.3, 2.5, 0.8, 1, 2, 2).expect("valid");
    let s = WeightState::new(vec![0.5, -0.2], vec![vec![0.3, 0.8], vec![-0.6, 0.1]]);
    let (du, dw) = gradient_flow_rhs(&s, &data, &hp).expect("valid");
    let dfdt: f64 = (0..2)
        .map(|i| hp.gamma * (du[i] * dot(&s.w[i], &data.x) + s.u[i] * dot(&dw[i], &data.x)))
        .sum();
    let r = model_output(&s, &data.x, &hp) - data.y;
    let wx: f64 = s.hidden(&data.x).iter().map(|h| h * h).sum();
    let uu = dot(&s.u, &s.u);
    let xx = dot(&data.x, &data.x);
    let printed = hp.gamma * hp.gamma * (hp.eta_w * wx + hp.eta_u * uu * xx);
    let fixed = ntk(&s, &data.x, &data.x, &hp).expect("valid");
    Erratum {
        topic: "learning rates in the tangent kernel",
        printed: "K = gamma^2 x^T (eta_w W^T W + eta_u ||u||^2 I) x'",
        implemented: "K = gamma^2 x^T (eta_u W^T W + eta_w ||u||^2 I) x'",
        printed_defect: (dfdt + 2.0 * printed * r).abs(),
        implemented_defect: (dfdt + 2.0 * fixed * r).abs(),
    }
}

/// Every discrepancy with its numeric evidence.
pub fn errata_report() -> Vec<Erratum> {
    vec![first_layer(), root_product(), xi_prefactor(), pq_scale(), reduction_power(), kernel_rates(), abc_symmetry()]
}
