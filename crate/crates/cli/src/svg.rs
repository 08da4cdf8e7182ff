//! Self-contained SVG log-log plots for sweep results.

use std::fmt::Write;

pub struct PlotSpec<'a> {
    /// Figure title, e.g. "korn_col3 on flat-spot".
    pub title: &'a str,
    /// (h, value) pairs; nonpositive entries are dropped.
    pub points: &'a [(f64, f64)],
    /// Fitted exponent and natural-log intercept of value ≈ e^b · h^alpha.
    pub alpha: f64,
    pub intercept: f64,
    /// Unix seconds embedded as a comment; None keeps the bytes stable
    /// across reruns.
    pub timestamp: Option<u64>,
}

const W: f64 = 800.0;
const H: f64 = 600.0;
const ML: f64 = 80.0;
const MR: f64 = 30.0;
const MT: f64 = 46.0;
const MB: f64 = 62.0;

/// Reference slopes drawn as dashed guides through the data centroid.
const GUIDES: [(f64, &str); 3] = [(1.0, "slope 1"), (1.5, "slope 3/2"), (5.0 / 3.0, "slope 5/3")];

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        ML + (x - self.x0) / (self.x1 - self.x0) * (W - ML - MR)
    }

    fn py(&self, y: f64) -> f64 {
        H - MB - (y - self.y0) / (self.y1 - self.y0) * (H - MT - MB)
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    let span = (hi - lo).max(0.2);
    (lo - 0.08 * span, hi + 0.08 * span)
}

/// Render the plot. Coordinates are in log10; the fit line and the slope
/// guides are clipped to the axes box.
pub fn scaling_plot(spec: &PlotSpec) -> String {
    let pts: Vec<(f64, f64)> = spec
        .points
        .iter()
        .filter(|&&(h, v)| h > 0.0 && v > 0.0)
        .map(|&(h, v)| (h.log10(), v.log10()))
        .collect();
    let (xlo, xhi) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            (a.min(p.0), b.max(p.0))
        });
    let (ylo, yhi) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            (a.min(p.1), b.max(p.1))
        });
    let (x0, x1) = if pts.is_empty() { (-3.0, -1.0) } else { padded(xlo, xhi) };
    let (y0, y1) = if pts.is_empty() { (-3.0, -1.0) } else { padded(ylo, yhi) };
    let f = Frame { x0, x1, y0, y1 };

    let mut s = String::new();
    let _ = write!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"13\">\n"
    );
    if let Some(t) = spec.timestamp {
        let _ = write!(s, "<!-- generated at unix {t} -->\n");
    }
    let _ = write!(s, "<rect width=\"{W}\" height=\"{H}\" fill=\"#ffffff\"/>\n");
    let _ = write!(
        s,
        "<clipPath id=\"box\"><rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\"/></clipPath>\n",
        ML,
        MT,
        W - ML - MR,
        H - MT - MB
    );

    for d in (x0.ceil() as i64)..=(x1.floor() as i64) {
        let px = f.px(d as f64);
        let _ = write!(
            s,
            "<line x1=\"{px:.2}\" y1=\"{MT:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"#dddddd\"/>\n",
            H - MB
        );
        let _ = write!(
            s,
            "<text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\" fill=\"#333333\">1e{d}</text>\n",
            H - MB + 18.0
        );
    }
    for d in (y0.ceil() as i64)..=(y1.floor() as i64) {
        let py = f.py(d as f64);
        let _ = write!(
            s,
            "<line x1=\"{ML:.2}\" y1=\"{py:.2}\" x2=\"{:.2}\" y2=\"{py:.2}\" stroke=\"#dddddd\"/>\n",
            W - MR
        );
        let _ = write!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" fill=\"#333333\">1e{d}</text>\n",
            ML - 8.0,
            py + 4.0
        );
    }
    let _ = write!(
        s,
        "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#555555\"/>\n",
        ML,
        MT,
        W - ML - MR,
        H - MT - MB
    );

    if !pts.is_empty() {
        let n = pts.len() as f64;
        let cx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let cy = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let _ = write!(s, "<g clip-path=\"url(#box)\">\n");
        for (slope, label) in GUIDES {
            let ya = cy + slope * (x0 - cx);
            let yb = cy + slope * (x1 - cx);
            let _ = write!(
                s,
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#999999\" stroke-dasharray=\"6 4\"/>\n",
                f.px(x0),
                f.py(ya),
                f.px(x1),
                f.py(yb)
            );
            let xt = x0 + 0.84 * (x1 - x0);
            let _ = write!(
                s,
                "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"#777777\">{label}</text>\n",
                f.px(xt),
                f.py(cy + slope * (xt - cx)) - 5.0
            );
        }
        // ln v = intercept + alpha ln h, converted to log10 on both axes.
        let b10 = spec.intercept / std::f64::consts::LN_10;
        let _ = write!(
            s,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#c0392b\" stroke-width=\"1.8\"/>\n",
            f.px(x0),
            f.py(b10 + spec.alpha * x0),
            f.px(x1),
            f.py(b10 + spec.alpha * x1)
        );
        let _ = write!(s, "</g>\n");
        for (x, y) in &pts {
            let _ = write!(
                s,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"#1f4e79\"/>\n",
                f.px(*x),
                f.py(*y)
            );
        }
    }

    let _ = write!(
        s,
        "<text x=\"{:.2}\" y=\"24\" fill=\"#111111\" font-size=\"16\">{}</text>\n",
        ML,
        xml_escape(spec.title)
    );
    let _ = write!(
        s,
        "<text x=\"{:.2}\" y=\"24\" text-anchor=\"end\" fill=\"#c0392b\">alpha = {:.4}</text>\n",
        W - MR,
        spec.alpha
    );
    let _ = write!(
        s,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" fill=\"#333333\">h</text>\n",
        ML + (W - ML - MR) / 2.0,
        H - 16.0
    );
    s.push_str("</svg>\n");
    s
}

fn xml_escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo() -> PlotSpec<'static> {
        PlotSpec {
            title: "demo",
            points: &[(0.04, 0.012), (0.02, 0.006), (0.01, 0.003)],
            alpha: 1.0,
            intercept: 0.3_f64.ln(),
            timestamp: None,
        }
    }

    #[test]
    fn output_is_stable_and_well_formed() {
        let a = scaling_plot(&demo());
        let b = scaling_plot(&demo());
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.ends_with("</svg>\n"));
        assert_eq!(a.matches("<circle").count(), 3);
        assert!(!a.contains("generated at"));
    }

    #[test]
    fn timestamp_comment_is_optional() {
        let mut spec = demo();
        spec.timestamp = Some(1700000000);
        let s = scaling_plot(&spec);
        assert!(s.contains("<!-- generated at unix 1700000000 -->"));
    }

    #[test]
    fn escapes_markup_in_titles() {
        let mut spec = demo();
        spec.title = "a<b&c";
        let s = scaling_plot(&spec);
        assert!(s.contains("a&lt;b&amp;c"));
    }
}
