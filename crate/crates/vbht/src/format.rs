//! Byte-stable text output: CSV tables and single-line JSON reports.
//!
//! Numbers are written with 9 significant digits in the style of C's `%.9g`
//! (trailing zeros dropped, exponent form outside `1e-5 ..= 1e9`), with `.`
//! as decimal separator and `\n` line endings.

use serde::Serialize;
use vbht_core::{Hyperparameters, TestReport, VBState};

use crate::experiments::{AlphaPoint, AsymptoteRow, RejectionRow, TrimsumSummary};

pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    if x.is_nan() {
        return "nan".to_owned();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_owned();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        trim_zeros(format!("{:.*}", (8 - exp) as usize, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_owned()), exp)
    }
}

fn trim_zeros(mut s: String) -> String {
    if s.contains('.') {
        let keep = s.trim_end_matches('0').trim_end_matches('.').len();
        s.truncate(keep);
    }
    s
}

fn table<I: IntoIterator<Item = Vec<String>>>(header: &str, rows: I) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn rejection_csv(rows: &[RejectionRow]) -> String {
    table(
        "n,level,trials,rejected,rate",
        rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                fmt_num(r.level.value()),
                r.trials.to_string(),
                r.rejected.to_string(),
                fmt_num(r.rate.value()),
            ]
        }),
    )
}

pub fn asymptote_csv(rows: &[AsymptoteRow]) -> String {
    table(
        "n,trial,delta_f_numeric,delta_f_asymptote",
        rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                r.trial.to_string(),
                fmt_num(r.delta_f_numeric),
                fmt_num(r.delta_f_asymptote),
            ]
        }),
    )
}

pub fn trimsum_csv(s: &TrimsumSummary) -> String {
    table(
        "n,n1,reps,empirical_mean,asymptote,exact_expectation,ratio_to_asymptote",
        [vec![
            s.n.to_string(),
            s.n1.to_string(),
            s.reps.to_string(),
            fmt_num(s.empirical_mean),
            fmt_num(s.asymptote),
            fmt_num(s.exact_expectation),
            fmt_num(s.ratio_to_asymptote),
        ]],
    )
}

pub fn alpha_curve_csv(points: &[AlphaPoint]) -> String {
    table(
        "phi,alpha0",
        points
            .iter()
            .map(|p| vec![fmt_num(p.phi), fmt_num(p.alpha0)]),
    )
}

#[derive(Serialize)]
struct TestJson {
    n: usize,
    phi: f64,
    sigma2: f64,
    delta_f: f64,
    d_term: f64,
    xi_hat: f64,
    level: f64,
    threshold: f64,
    p_value: f64,
    reject: bool,
    n1: f64,
    b_mean: f64,
    iterations: usize,
    converged: bool,
}

/// The test report as one line of JSON, keys in declaration order.
pub fn report_json(r: &TestReport) -> String {
    serde_json::to_string(&TestJson {
        n: r.n,
        phi: r.phi,
        sigma2: r.sigma2,
        delta_f: r.delta_f,
        d_term: r.d_term,
        xi_hat: r.xi_hat,
        level: r.level.value(),
        threshold: r.threshold,
        p_value: r.p_value.value(),
        reject: r.reject,
        n1: r.n1,
        b_mean: r.b_mean,
        iterations: r.iterations,
        converged: r.converged,
    })
    .expect("plain struct serializes")
}

#[derive(Serialize)]
struct FitJson {
    n: usize,
    phi: f64,
    sigma2: f64,
    delta_f: f64,
    n1: f64,
    b_mean: f64,
    b_variance: f64,
    log_w0: f64,
    log_w1: f64,
    iterations: usize,
    converged: bool,
}

/// A fitted VB state as one line of JSON.
pub fn fit_json(state: &VBState, hyper: &Hyperparameters) -> String {
    let m = &state.moments;
    serde_json::to_string(&FitJson {
        n: state.resp.len(),
        phi: hyper.phi(),
        sigma2: hyper.sigma2(),
        delta_f: state.delta_f,
        n1: state.n1(),
        b_mean: m.b_mean,
        b_variance: m.b_variance(),
        log_w0: m.log_w0,
        log_w1: m.log_w1,
        iterations: state.iterations,
        converged: state.converged,
    })
    .expect("plain struct serializes")
}
