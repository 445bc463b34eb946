//! Browser-facing operations, each returning a JSON string so the static
//! page can plot without any framework. Invalid inputs come back as
//! `{"error": "..."}` rather than trapping the WebAssembly instance.
//!
//! Build for the web with
//! `wasm-pack build crates/demo --target web --out-dir www/pkg`;
//! the same functions compile natively so the unit tests below run under
//! plain `cargo test`.

use serde::Serialize;
use wasm_bindgen::prelude::wasm_bindgen;

use prelog::bound::{derive_constants, sum_rate_upper_bound};
use prelog::channel::{ChannelConfig, FadingModel};
use prelog::maxent::{hmax_asymptote, maxent_solution, GAMMA_INFIMUM};
use prelog::sim::{scheme_sum_rate, Scheme, SchemeTag};
use prelog::RandomStream;

#[derive(Serialize)]
struct ConstantsOut {
    m_half: f64,
    gamma: f64,
    gamma_prime: f64,
    gamma_infimum: f64,
}

#[derive(Serialize)]
struct MaxentCurveOut {
    gamma: Vec<f64>,
    h_max: Vec<f64>,
    asymptote: Vec<f64>,
}

#[derive(Serialize)]
struct RateCurvesOut {
    snr_db: Vec<f64>,
    bound: Vec<f64>,
    zf_imperfect: Vec<f64>,
    zf_perfect: Vec<f64>,
    single_user: Vec<f64>,
    cooperative: Vec<f64>,
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).unwrap_or_else(|e| error_json(&e.to_string()))
}

fn error_json(message: &str) -> String {
    json(&serde_json::json!({ "error": message }))
}

/// The pinned constants of the sum-rate ceiling, plus the moment-target
/// infimum of the angle-entropy family.
#[wasm_bindgen]
pub fn derived_constants_json() -> String {
    let c = derive_constants();
    json(&ConstantsOut {
        m_half: c.m_half,
        gamma: c.gamma,
        gamma_prime: c.gamma_prime,
        gamma_infimum: GAMMA_INFIMUM,
    })
}

/// Angle-entropy ceiling and its high-target asymptote on a log-spaced grid
/// of moment targets ending at `gamma_max`.
#[wasm_bindgen]
pub fn maxent_curve_json(gamma_max: f64, points: u32) -> String {
    if !(gamma_max.is_finite() && gamma_max > GAMMA_INFIMUM * 1.05) {
        return error_json(&format!(
            "gamma_max must exceed the family infimum 1/pi = {GAMMA_INFIMUM:.4}"
        ));
    }
    if !(2..=4096).contains(&points) {
        return error_json("points must lie in 2..=4096");
    }
    let lo = GAMMA_INFIMUM * 1.02;
    let ratio = gamma_max / lo;
    let mut out = MaxentCurveOut {
        gamma: Vec::with_capacity(points as usize),
        h_max: Vec::with_capacity(points as usize),
        asymptote: Vec::with_capacity(points as usize),
    };
    for i in 0..points {
        let t = i as f64 / (points - 1) as f64;
        let gamma = lo * ratio.powf(t);
        match maxent_solution(gamma) {
            Ok(solution) => {
                out.gamma.push(gamma);
                out.h_max.push(solution.h_max);
                out.asymptote.push(hmax_asymptote(gamma));
            }
            Err(e) => return error_json(&e.to_string()),
        }
    }
    json(&out)
}

/// Sum-rate ceiling and Monte-Carlo scheme rates on a dB grid from 0 to
/// `snr_db_stop`, for Gaussian fading with per-component estimation-error
/// variance `eps` on both links.
#[wasm_bindgen]
pub fn rate_curves_json(eps: f64, snr_db_stop: f64, points: u32, n_mc: u32, seed: u32) -> String {
    if !(eps.is_finite() && eps > 0.0) {
        return error_json("eps must be positive (zero leaves the error with no density)");
    }
    if !(snr_db_stop.is_finite() && (10.0..=140.0).contains(&snr_db_stop)) {
        return error_json("snr_db_stop must lie in 10..=140");
    }
    if !(2..=256).contains(&points) {
        return error_json("points must lie in 2..=256");
    }
    let model = match FadingModel::gaussian_iid(1.0, eps) {
        Ok(model) => model,
        Err(e) => return error_json(&e.to_string()),
    };
    let config = match ChannelConfig::new(model, model, 1.0, 1.0) {
        Ok(config) => config,
        Err(e) => return error_json(&e.to_string()),
    };
    let root = RandomStream::new(seed as u64);
    let mut out = RateCurvesOut {
        snr_db: Vec::new(),
        bound: Vec::new(),
        zf_imperfect: Vec::new(),
        zf_perfect: Vec::new(),
        single_user: Vec::new(),
        cooperative: Vec::new(),
    };
    for i in 0..points {
        let db = snr_db_stop * (i as f64 + 1.0) / points as f64;
        let snr = 10f64.powf(db / 10.0);
        let ceiling = match sum_rate_upper_bound(&config.with_snr_db(db)) {
            Ok(report) => report.total,
            Err(e) => return error_json(&e.to_string()),
        };
        out.snr_db.push(db);
        out.bound.push(ceiling);
        for (tag, series) in [
            (SchemeTag::ZfImperfect, &mut out.zf_imperfect),
            (SchemeTag::ZfPerfect, &mut out.zf_perfect),
            (SchemeTag::SingleUser, &mut out.single_user),
            (SchemeTag::Cooperative, &mut out.cooperative),
        ] {
            let stream = root.split((i as u64) << 2 | tag as u64);
            match scheme_sum_rate(&Scheme::new(tag), &config, snr, n_mc as usize, &stream) {
                Ok(result) => series.push(result.sum_rate),
                Err(e) => return error_json(&e.to_string()),
            }
        }
    }
    json(&out)
}
