//! CSV schemas written by the simulator.
//!
//! Column order is fixed by the header constants below. Reals use the
//! shortest `%.17g` rendering, which round-trips every `f64`; undefined
//! values (empty degree classes, all-zealot populations) are empty fields.

use std::fmt::Write as _;

use race_core::experiments::{CellSummary, MeanStderr, SweepRecord, TimeSeriesRow};
use race_core::networks::DegreeClass;

pub const SWEEP_HEADER: &[&str] = &[
    "network_type",
    "network_seed",
    "instance_index",
    "replicate_index",
    "Z",
    "m_or_L",
    "beta",
    "c",
    "b",
    "B",
    "W",
    "s",
    "p_fo",
    "p_r",
    "normalized",
    "update_rule",
    "zealot_fraction",
    "zealot_order",
    "interference",
    "generations",
    "window",
    "au_freq_all",
    "au_freq_nonzealot",
    "au_low",
    "au_med",
    "au_high",
];

pub const TIMESERIES_HEADER: &[&str] = &["generation", "au_all", "au_low", "au_med", "au_high"];

pub const SUMMARY_HEADER: &[&str] = &[
    "c",
    "b",
    "B",
    "W",
    "s",
    "p_fo",
    "p_r",
    "beta",
    "zealot_fraction",
    "n",
    "au_all_mean",
    "au_all_stderr",
    "au_nonzealot_mean",
    "au_nonzealot_stderr",
    "au_low_mean",
    "au_low_stderr",
    "au_med_mean",
    "au_med_stderr",
    "au_high_mean",
    "au_high_stderr",
];

pub const REGIONS_HEADER: &[&str] = &[
    "regime",
    "s",
    "p_fo",
    "b",
    "c",
    "p_r",
    "early_lo",
    "early_hi",
    "late_welfare",
    "late_risk_dominance",
    "region",
];

/// Formats like C's `%.17g`.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.into();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", strip_fraction_zeros(mantissa), exp.abs())
    } else {
        let decimals = (16 - exp) as usize;
        strip_fraction_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_fraction_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_g17).unwrap_or_default()
}

fn push_row(out: &mut String, fields: &[String]) {
    out.push_str(&fields.join(","));
    out.push('\n');
}

fn header(columns: &[&str]) -> String {
    let mut s = columns.join(",");
    s.push('\n');
    s
}

pub fn sweep_csv(records: &[SweepRecord]) -> String {
    let mut out = header(SWEEP_HEADER);
    for r in records {
        let p = &r.params;
        let res = &r.result;
        push_row(
            &mut out,
            &[
                r.network.generator.to_string(),
                r.network.seed.to_string(),
                r.instance.to_string(),
                r.replicate.to_string(),
                r.network.nodes.to_string(),
                r.network.m.to_string(),
                fmt_g17(r.dynamics.beta),
                fmt_g17(p.cost),
                fmt_g17(p.benefit),
                fmt_g17(p.prize),
                fmt_g17(p.rounds),
                fmt_g17(p.speed),
                fmt_g17(p.p_found_out),
                fmt_g17(p.p_disaster),
                r.dynamics.normalized.to_string(),
                r.dynamics.update_rule.to_string(),
                fmt_g17(r.zealots.fraction),
                r.zealots.order.to_string(),
                r.zealots.interference.label().to_string(),
                r.generations.to_string(),
                res.window.to_string(),
                fmt_g17(res.au_freq_all),
                fmt_opt(res.au_freq_nonzealot),
                fmt_opt(res.au_by_class.get(DegreeClass::Low)),
                fmt_opt(res.au_by_class.get(DegreeClass::Medium)),
                fmt_opt(res.au_by_class.get(DegreeClass::High)),
            ],
        );
    }
    out
}

pub fn timeseries_csv(rows: &[TimeSeriesRow]) -> String {
    let mut out = header(TIMESERIES_HEADER);
    for row in rows {
        push_row(
            &mut out,
            &[
                row.generation.to_string(),
                fmt_g17(row.au_all),
                fmt_opt(row.au_by_class.get(DegreeClass::Low)),
                fmt_opt(row.au_by_class.get(DegreeClass::Medium)),
                fmt_opt(row.au_by_class.get(DegreeClass::High)),
            ],
        );
    }
    out
}

pub fn summary_csv(summaries: &[CellSummary]) -> String {
    let pair = |m: Option<MeanStderr>| match m {
        Some(m) => [fmt_g17(m.mean), fmt_g17(m.stderr)],
        None => [String::new(), String::new()],
    };
    let mut out = header(SUMMARY_HEADER);
    for s in summaries {
        let p = &s.params;
        let mut fields = vec![
            fmt_g17(p.cost),
            fmt_g17(p.benefit),
            fmt_g17(p.prize),
            fmt_g17(p.rounds),
            fmt_g17(p.speed),
            fmt_g17(p.p_found_out),
            fmt_g17(p.p_disaster),
            fmt_g17(p.beta),
            fmt_g17(s.zealots.fraction),
            s.au_all.n.to_string(),
        ];
        fields.extend(pair(Some(s.au_all)));
        fields.extend(pair(s.au_nonzealot));
        for class in s.au_by_class {
            fields.extend(pair(class));
        }
        push_row(&mut out, &fields);
    }
    out
}

/// One row of the analytical boundary table.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionRow {
    pub regime: String,
    pub speed: f64,
    pub p_found_out: f64,
    pub benefit: f64,
    pub cost: f64,
    /// Absent when only the boundaries were requested.
    pub p_disaster: Option<f64>,
    pub early_lo: f64,
    pub early_hi: f64,
    pub late_welfare: Option<f64>,
    pub late_risk_dominance: f64,
    pub region: Option<String>,
}

pub fn regions_csv(rows: &[RegionRow]) -> String {
    let mut out = header(REGIONS_HEADER);
    for r in rows {
        let mut line = String::new();
        let _ = write!(
            line,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.regime,
            fmt_g17(r.speed),
            fmt_g17(r.p_found_out),
            fmt_g17(r.benefit),
            fmt_g17(r.cost),
            fmt_opt(r.p_disaster),
            fmt_g17(r.early_lo),
            fmt_g17(r.early_hi),
            fmt_opt(r.late_welfare),
            fmt_g17(r.late_risk_dominance),
            r.region.clone().unwrap_or_default(),
        );
        out.push_str(&line);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_matches_printf() {
        let cases = [
            (0.5, "0.5"),
            (0.1, "0.10000000000000001"),
            (1.0, "1"),
            (10000.0, "10000"),
            (1e6, "1000000"),
            (1e7, "10000000"),
            (0.21875, "0.21875"),
            (7.0 / 11.0, "0.63636363636363635"),
            (1.0 / 3.0, "0.33333333333333331"),
            (1e-5, "1.0000000000000001e-05"),
            (1.5e20, "1.5e+20"),
            (-2.25, "-2.25"),
            (0.0, "0"),
            (123456789.0, "123456789"),
        ];
        for (x, expected) in cases {
            assert_eq!(fmt_g17(x), expected, "{x}");
        }
    }

    #[test]
    fn g17_round_trips() {
        let mut x = 1.234567e-7f64;
        for _ in 0..200 {
            assert_eq!(fmt_g17(x).parse::<f64>().unwrap(), x);
            x *= -1.7;
        }
    }

    #[test]
    fn header_has_documented_columns() {
        assert_eq!(SWEEP_HEADER.len(), 26);
        assert_eq!(SWEEP_HEADER[0], "network_type");
        assert_eq!(SWEEP_HEADER[25], "au_high");
    }
}
