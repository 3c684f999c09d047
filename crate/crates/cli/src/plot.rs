//! Fixed-layout SVG rendering of an energy curve: `λ` on the horizontal
//! axis, `c` on the vertical axis.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 540.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 70.0;

pub struct CurvePlot<'a> {
    pub title: &'a str,
    /// `(λ, c)` pairs of solved points, ordered by `c`.
    pub points: &'a [(f64, f64)],
    pub lambda1: Option<f64>,
    pub lambda_target: Option<f64>,
    /// Logarithmic `|c|` axis.
    pub log_c: bool,
}

fn nice_step(span: f64, count: usize) -> f64 {
    let raw = span / count as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.0 {
        2.0
    } else if norm < 7.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn linear_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let step = nice_step(hi - lo, 5);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn label(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else if x.abs() >= 1e4 || x.abs() < 1e-2 {
        format!("{x:.0e}")
    } else {
        let s = format!("{x:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

impl CurvePlot<'_> {
    pub fn render(&self) -> String {
        let mut lambdas: Vec<f64> = self.points.iter().map(|p| p.0).collect();
        lambdas.extend(self.lambda1);
        lambdas.extend(self.lambda_target);
        let (mut l_lo, mut l_hi) = lambdas
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
                (a.min(x), b.max(x))
            });
        if !(l_lo.is_finite() && l_hi.is_finite()) {
            l_lo = 0.0;
            l_hi = 1.0;
        }
        if l_hi - l_lo < 1e-12 {
            l_lo -= 0.5;
            l_hi += 0.5;
        }
        let pad = 0.05 * (l_hi - l_lo);
        let (l_lo, l_hi) = (l_lo - pad, l_hi + pad);

        let c_sign = self.points.first().map_or(-1.0, |p| p.1.signum());
        let c_map = |c: f64| if self.log_c { c.abs().log10() } else { c };
        let cs: Vec<f64> = self.points.iter().map(|p| c_map(p.1)).collect();
        let (mut c_lo, mut c_hi) = cs
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
                (a.min(x), b.max(x))
            });
        if !(c_lo.is_finite() && c_hi.is_finite()) {
            c_lo = 0.0;
            c_hi = 1.0;
        }
        if c_hi - c_lo < 1e-12 {
            c_lo -= 0.5;
            c_hi += 0.5;
        }
        // Vertical axis shows c itself increasing upward.
        let upward = |v: f64| if self.log_c && c_sign < 0.0 { -v } else { v };
        let (v_lo, v_hi) = {
            let (a, b) = (upward(c_lo), upward(c_hi));
            (a.min(b), a.max(b))
        };

        let plot_w = WIDTH - LEFT - RIGHT;
        let plot_h = HEIGHT - TOP - BOTTOM;
        let px = |l: f64| LEFT + (l - l_lo) / (l_hi - l_lo) * plot_w;
        let py = |c: f64| TOP + (v_hi - upward(c_map(c))) / (v_hi - v_lo) * plot_h;

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
        );
        let _ = writeln!(
            svg,
            "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"28\" text-anchor=\"middle\" font-size=\"15\">{}</text>",
            WIDTH / 2.0,
            escape(self.title)
        );
        let _ = writeln!(
            svg,
            "<rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{plot_w}\" height=\"{plot_h}\" fill=\"none\" stroke=\"black\"/>"
        );

        for t in linear_ticks(l_lo, l_hi) {
            let x = px(t);
            let _ = writeln!(
                svg,
                "<line x1=\"{x:.2}\" y1=\"{}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"black\"/>",
                TOP + plot_h,
                TOP + plot_h + 5.0
            );
            let _ = writeln!(
                svg,
                "<text x=\"{x:.2}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
                TOP + plot_h + 20.0,
                label(t)
            );
        }
        let v_ticks: Vec<(f64, String)> = if self.log_c {
            let (a, b) = (c_lo.ceil() as i64, c_hi.floor() as i64);
            (a..=b)
                .map(|k| (upward(k as f64), label(c_sign * 10f64.powi(k as i32))))
                .collect()
        } else {
            linear_ticks(c_lo, c_hi)
                .into_iter()
                .map(|t| (t, label(t)))
                .collect()
        };
        for (v, text) in v_ticks {
            let y = TOP + (v_hi - v) / (v_hi - v_lo) * plot_h;
            let _ = writeln!(
                svg,
                "<line x1=\"{}\" y1=\"{y:.2}\" x2=\"{LEFT}\" y2=\"{y:.2}\" stroke=\"black\"/>",
                LEFT - 5.0
            );
            let _ = writeln!(
                svg,
                "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
                LEFT - 8.0,
                y + 4.0,
                text
            );
        }
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">λ</text>",
            LEFT + plot_w / 2.0,
            HEIGHT - 25.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"20\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {0})\">c</text>",
            TOP + plot_h / 2.0
        );

        if let Some(l1) = self.lambda1 {
            let x = px(l1);
            let _ = writeln!(
                svg,
                "<line class=\"asymptote\" x1=\"{x:.2}\" y1=\"{TOP}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"gray\" stroke-dasharray=\"2,3\"/>",
                TOP + plot_h
            );
            let _ = writeln!(
                svg,
                "<text x=\"{:.2}\" y=\"{}\" fill=\"gray\">λ₁ = {}</text>",
                x + 4.0,
                TOP + 14.0,
                label(l1)
            );
        }
        if let Some(target) = self.lambda_target {
            let x = px(target);
            let _ = writeln!(
                svg,
                "<line class=\"target\" x1=\"{x:.2}\" y1=\"{TOP}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"firebrick\" stroke-dasharray=\"8,5\"/>",
                TOP + plot_h
            );
        }
        let coords: Vec<String> = self
            .points
            .iter()
            .map(|&(l, c)| format!("{:.2},{:.2}", px(l), py(c)))
            .collect();
        let _ = writeln!(
            svg,
            "<polyline class=\"curve\" points=\"{}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\"/>",
            coords.join(" ")
        );

        let lx = LEFT + plot_w - 150.0;
        let ly = TOP + plot_h - 60.0;
        let _ = writeln!(svg, "<rect x=\"{lx}\" y=\"{ly}\" width=\"140\" height=\"52\" fill=\"white\" stroke=\"gray\"/>");
        let _ = writeln!(svg, "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"steelblue\" stroke-width=\"2\"/>", lx + 8.0, ly + 16.0, lx + 38.0, ly + 16.0);
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\">λ_c,1</text>",
            lx + 46.0,
            ly + 20.0
        );
        let _ = writeln!(svg, "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"firebrick\" stroke-dasharray=\"8,5\"/>", lx + 8.0, ly + 36.0, lx + 38.0, ly + 36.0);
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\">λ target</text>",
            lx + 46.0,
            ly + 40.0
        );
        svg.push_str("</svg>\n");
        svg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_polyline_and_optional_dashed_target() {
        let pts = [(2.6, -1e4), (2.4, -1e2), (1.6, -1.0), (-1.0, -1e-2)];
        let plain = CurvePlot {
            title: "case I",
            points: &pts,
            lambda1: Some(2.77),
            lambda_target: None,
            log_c: true,
        }
        .render();
        assert_eq!(plain.matches("<polyline").count(), 1);
        assert!(!plain.contains("class=\"target\""));
        let with_target = CurvePlot {
            title: "case I",
            points: &pts,
            lambda1: Some(2.77),
            lambda_target: Some(1.77),
            log_c: true,
        }
        .render();
        assert_eq!(with_target.matches("class=\"target\"").count(), 1);
        assert!(with_target.starts_with("<svg") && with_target.ends_with("</svg>\n"));
    }

    #[test]
    fn ticks_are_round_numbers() {
        let t = linear_ticks(-1.05, 2.9);
        assert_eq!(t, vec![-1.0, 0.0, 1.0, 2.0]);
    }
}
