//! Self-contained SVG summary plot: log₁₀ of the Calabi energy and of F
//! against t in the top panel, volume against t below. No external
//! renderer; floats are formatted with fixed precision so output is
//! deterministic.

use l2flow_core::flow::DiagnosticsRecord;

const W: f64 = 720.0;
const PANEL_H: f64 = 260.0;
const MARGIN: f64 = 54.0;

struct Panel {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    tmin: f64,
    tmax: f64,
    vmin: f64,
    vmax: f64,
}

impl Panel {
    fn map(&self, t: f64, v: f64) -> (f64, f64) {
        let fx = if self.tmax > self.tmin {
            (t - self.tmin) / (self.tmax - self.tmin)
        } else {
            0.5
        };
        let fy = if self.vmax > self.vmin {
            (v - self.vmin) / (self.vmax - self.vmin)
        } else {
            0.5
        };
        (self.x0 + fx * self.w, self.y0 + self.h * (1.0 - fy))
    }

    fn polyline(&self, pts: &[(f64, f64)], color: &str) -> String {
        let mut s = format!("<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"");
        for &(t, v) in pts {
            let (x, y) = self.map(t, v);
            s.push_str(&format!("{x:.2},{y:.2} "));
        }
        s.push_str("\"/>\n");
        s
    }

    fn frame(&self, title: &str, ylabel: &str) -> String {
        let mut s = String::new();
        s.push_str(&format!(
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"#333\"/>\n",
            self.x0, self.y0, self.w, self.h
        ));
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"13\" fill=\"#111\">{title}</text>\n",
            self.x0,
            self.y0 - 8.0
        ));
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" fill=\"#555\">{ylabel}</text>\n",
            4.0,
            self.y0 + 12.0
        ));
        for (frac, label) in [(0.0, self.vmin), (1.0, self.vmax)] {
            let y = self.y0 + self.h * (1.0 - frac);
            s.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\" fill=\"#555\" text-anchor=\"end\">{label:.3e}</text>\n",
                self.x0 - 4.0,
                y + 3.0
            ));
        }
        for (frac, label) in [(0.0, self.tmin), (1.0, self.tmax)] {
            let x = self.x0 + self.w * frac;
            s.push_str(&format!(
                "<text x=\"{x:.1}\" y=\"{:.1}\" font-size=\"10\" fill=\"#555\" text-anchor=\"middle\">{label:.3}</text>\n",
                self.y0 + self.h + 14.0
            ));
        }
        s
    }
}

fn finite_log10(v: f64) -> Option<f64> {
    if v > 0.0 {
        Some((v).log10())
    } else {
        None
    }
}

pub fn summary_svg(records: &[DiagnosticsRecord]) -> String {
    let tmin = records.first().map_or(0.0, |r| r.t);
    let tmax = records.last().map_or(1.0, |r| r.t);

    let log_ca: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| finite_log10(r.calabi).map(|v| (r.t, v)))
        .collect();
    let log_f: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| finite_log10(r.f).map(|v| (r.t, v)))
        .collect();
    let vols: Vec<(f64, f64)> = records.iter().map(|r| (r.t, r.vol)).collect();

    let span = |pts: &[(f64, f64)]| -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &(_, v) in pts {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() || !hi.is_finite() {
            (0.0, 1.0)
        } else if lo == hi {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo, hi)
        }
    };
    let (mut lo1, mut hi1) = span(&log_ca);
    let (lo2, hi2) = span(&log_f);
    if !log_f.is_empty() {
        lo1 = lo1.min(lo2);
        hi1 = hi1.max(hi2);
    }
    let energies = Panel {
        x0: MARGIN,
        y0: 28.0,
        w: W - MARGIN - 20.0,
        h: PANEL_H - 60.0,
        tmin,
        tmax,
        vmin: lo1,
        vmax: hi1,
    };
    let (vlo, vhi) = span(&vols);
    let volume = Panel {
        x0: MARGIN,
        y0: PANEL_H + 28.0,
        w: W - MARGIN - 20.0,
        h: PANEL_H - 60.0,
        tmin,
        tmax,
        vmin: vlo,
        vmax: vhi,
    };

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W:.0}\" height=\"{:.0}\" viewBox=\"0 0 {W:.0} {:.0}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        2.0 * PANEL_H,
        2.0 * PANEL_H
    );
    svg.push_str(&energies.frame("log10 Calabi (blue), log10 F (red) vs t", "log10"));
    if !log_ca.is_empty() {
        svg.push_str(&energies.polyline(&log_ca, "#1f4fd8"));
    }
    if !log_f.is_empty() {
        svg.push_str(&energies.polyline(&log_f, "#d8321f"));
    }
    svg.push_str(&volume.frame("volume vs t", "vol"));
    svg.push_str(&volume.polyline(&vols, "#0a7a2f"));
    svg.push_str("</svg>\n");
    svg
}
