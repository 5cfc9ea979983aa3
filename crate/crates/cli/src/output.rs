//! CSV and SVG text emission. Everything is built in memory as `String`s
//! with `\n` line endings so outputs are byte-stable.

use std::fmt::Write as _;

use rdgalerkin::norms::{FieldSample, NormReport};

pub const SOLUTION_HEADER: &str = "x,t,M,N";
pub const NORMS_HEADER: &str = "dt,L2_M,Linf_M,L2_N,Linf_N";

/// Nine significant digits in scientific notation; `.` decimal regardless of locale.
pub fn fmt_value(v: f64) -> String {
    format!("{v:.8e}")
}

pub fn solution_csv(samples: &[FieldSample]) -> String {
    let mut out = String::with_capacity(64 * (samples.len() + 1));
    out.push_str(SOLUTION_HEADER);
    out.push('\n');
    for s in samples {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_value(s.x),
            fmt_value(s.t),
            fmt_value(s.m),
            fmt_value(s.n)
        );
    }
    out
}

/// Rows without a report (the coarsest increment) leave the norm columns empty.
pub fn norms_csv(rows: &[(f64, Option<NormReport>)]) -> String {
    let mut out = String::from(NORMS_HEADER);
    out.push('\n');
    for (dt, report) in rows {
        match report {
            Some(r) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    fmt_value(*dt),
                    fmt_value(r.l2_m),
                    fmt_value(r.linf_m),
                    fmt_value(r.l2_n),
                    fmt_value(r.linf_n)
                );
            }
            None => {
                let _ = writeln!(out, "{},,,,", fmt_value(*dt));
            }
        }
    }
    out
}

const WIDTH: f64 = 640.0;
const PANEL: f64 = 220.0;
const MARGIN: f64 = 60.0;

fn panel(out: &mut String, top: f64, label: &str, xs: &[f64], ys: &[f64], colour: &str) {
    let (x0, x1) = (xs[0], xs[xs.len() - 1]);
    let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // flat profiles still get a visible band
    let (lo, hi) = if hi - lo > 1e-300 {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    };
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = PANEL - 50.0;
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * plot_w;
    let py = |y: f64| top + 20.0 + (hi - y) / (hi - lo) * plot_h;
    let _ = writeln!(
        out,
        r#"<rect x="{:.2}" y="{:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="black"/>"#,
        MARGIN,
        top + 20.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="14">{label}</text>"#,
        MARGIN,
        top + 14.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{:.4e}</text>"#,
        MARGIN - 4.0,
        top + 24.0,
        hi
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{:.4e}</text>"#,
        MARGIN - 4.0,
        top + 20.0 + plot_h,
        lo
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="11">{}</text>"#,
        MARGIN,
        top + 34.0 + plot_h,
        x0
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#,
        MARGIN + plot_w,
        top + 34.0 + plot_h,
        x1
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">x</text>"#,
        MARGIN + 0.5 * plot_w,
        top + 34.0 + plot_h
    );
    out.push_str(r#"<polyline fill="none" stroke=""#);
    out.push_str(colour);
    out.push_str(r#"" stroke-width="1.5" points=""#);
    for (i, (&x, &y)) in xs.iter().zip(ys).enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{:.2},{:.2}", px(x), py(y));
    }
    out.push_str("\"/>\n");
}

/// Two stacked line plots (M above N) of one time level.
pub fn profile_svg(t: f64, xs: &[f64], ms: &[f64], ns: &[f64]) -> String {
    assert!(xs.len() >= 2 && xs.len() == ms.len() && xs.len() == ns.len());
    let height = 2.0 * PANEL + 20.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    panel(
        &mut out,
        0.0,
        &format!("M(x, t = {t})"),
        xs,
        ms,
        "steelblue",
    );
    panel(
        &mut out,
        PANEL,
        &format!("N(x, t = {t})"),
        xs,
        ns,
        "firebrick",
    );
    out.push_str("</svg>\n");
    out
}

/// File name for the plot at `t`, e.g. `profile_t2.5.svg`.
pub fn profile_name(t: f64) -> String {
    format!("profile_t{t}.svg")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_value(-0.00877), "-8.77000000e-3");
        assert_eq!(fmt_value(1.106898765432), "1.10689877e0");
        assert_eq!(fmt_value(0.0), "0.00000000e0");
    }

    #[test]
    fn blank_first_row() {
        let r = NormReport {
            dt: 0.2,
            l2_m: 1e-6,
            linf_m: 2e-7,
            l2_n: 3e-6,
            linf_n: 4e-7,
            grid_points: 101,
            t: 10.0,
        };
        let text = norms_csv(&[(0.4, None), (0.2, Some(r))]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], NORMS_HEADER);
        assert_eq!(lines[1], "4.00000000e-1,,,,");
        assert_eq!(
            lines[2],
            "2.00000000e-1,1.00000000e-6,2.00000000e-7,3.00000000e-6,4.00000000e-7"
        );
        assert!(!text.contains('\r'));
    }

    #[test]
    fn svg_is_well_formed_text() {
        let xs = [0.0, 1.0, 2.0];
        let svg = profile_svg(1.0, &xs, &[0.0, -0.01, 0.0], &[1.0, 1.0, 1.0]);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(profile_name(2.5), "profile_t2.5.svg");
    }
}
