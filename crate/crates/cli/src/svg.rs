//! Plots as a pure function of the trace records.
//!
//! The layout is chosen from the record fields: `circle` gives the limit set
//! on the unit circle, `xi_angle` with `chi` gives one panel for each of the
//! first two fiber coordinates, `s` with `dist` gives a log-log decay plot per
//! start, `k` with `dist` or `max_ratio` a semilog plot, and `bin` with `count`
//! a histogram.

use std::fmt::Write;

use serde_json::Value;

const W: f64 = 480.0;
const H: f64 = 360.0;
const M: f64 = 48.0;

pub fn render(records: &[Value]) -> Option<String> {
    let has = |k: &str| !records.is_empty() && records.iter().all(|r| r.get(k).is_some());
    if has("circle") {
        circle(records)
    } else if has("xi_angle") && has("chi") {
        fiber_panels(records)
    } else if has("s") && has("dist") {
        decay(records)
    } else if has("k") && has("dist") {
        semilog(records, "dist")
    } else if has("k") && has("max_ratio") {
        semilog(records, "max_ratio")
    } else if has("bin") && has("count") {
        histogram(records)
    } else {
        None
    }
}

fn num(v: &Value, k: &str) -> Option<f64> {
    v.get(k)?.as_f64()
}

struct Panel {
    x0: f64,
    y0: f64,
    xr: (f64, f64),
    yr: (f64, f64),
}

impl Panel {
    fn new(x0: f64, y0: f64, xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        Panel {
            x0,
            y0,
            xr: range(xs),
            yr: range(ys),
        }
    }

    fn px(&self, x: f64) -> f64 {
        self.x0 + M + (x - self.xr.0) / (self.xr.1 - self.xr.0) * (W - 2.0 * M)
    }

    fn py(&self, y: f64) -> f64 {
        self.y0 + H - M - (y - self.yr.0) / (self.yr.1 - self.yr.0) * (H - 2.0 * M)
    }

    fn frame(&self, out: &mut String, xlabel: &str, ylabel: &str) {
        let (l, r, t, b) = (self.x0 + M, self.x0 + W - M, self.y0 + M, self.y0 + H - M);
        let _ = writeln!(
            out,
            r#"<rect x="{l:.1}" y="{t:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
            r - l,
            b - t
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{xlabel}</text>"#,
            (l + r) / 2.0,
            b + 32.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" transform="rotate(-90 {:.1} {:.1})">{ylabel}</text>"#,
            l - 34.0,
            (t + b) / 2.0,
            l - 34.0,
            (t + b) / 2.0
        );
        for (x, anchor, v) in [(l, "start", self.xr.0), (r, "end", self.xr.1)] {
            let _ = writeln!(
                out,
                r#"<text x="{x:.1}" y="{:.1}" text-anchor="{anchor}">{}</text>"#,
                b + 14.0,
                label(v)
            );
        }
        for (y, v) in [(b, self.yr.0), (t + 10.0, self.yr.1)] {
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{y:.1}" text-anchor="end">{}</text>"#,
                l - 4.0,
                label(v)
            );
        }
    }

    fn dot(&self, out: &mut String, x: f64, y: f64) {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="1.5"/>"#,
            self.px(x),
            self.py(y)
        );
    }

    fn polyline(&self, out: &mut String, pts: &[(f64, f64)]) {
        let coords: Vec<String> = pts
            .iter()
            .map(|(x, y)| format!("{:.2},{:.2}", self.px(*x), self.py(*y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="black" stroke-opacity="0.6"/>"#,
            coords.join(" ")
        );
    }
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn label(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

fn document(width: f64, height: f64, body: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" font-family=\"sans-serif\" font-size=\"11\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}</svg>\n"
    )
}

fn circle(records: &[Value]) -> Option<String> {
    let mut body = String::new();
    let (c, r) = (H / 2.0, H / 2.0 - M);
    let _ = writeln!(body, r#"<circle cx="{c}" cy="{c}" r="{r}" fill="none" stroke="gray"/>"#);
    for rec in records {
        let p = rec.get("circle")?.as_array()?;
        let (x, y) = (p.first()?.as_f64()?, p.get(1)?.as_f64()?);
        let _ = writeln!(body, r#"<circle cx="{:.2}" cy="{:.2}" r="1.5"/>"#, c + r * x, c - r * y);
    }
    Some(document(H, H, &body))
}

fn fiber_panels(records: &[Value]) -> Option<String> {
    let chis: Vec<Vec<f64>> = records
        .iter()
        .map(|r| {
            r.get("chi")?
                .as_array()?
                .iter()
                .map(Value::as_f64)
                .collect::<Option<Vec<f64>>>()
        })
        .collect::<Option<_>>()?;
    let angles: Vec<f64> = records.iter().map(|r| num(r, "xi_angle")).collect::<Option<_>>()?;
    let panels = chis.first()?.len().min(2);
    let mut body = String::new();
    for k in 0..panels {
        let ys = chis.iter().map(|c| c.get(k).copied().unwrap_or(f64::NAN));
        let p = Panel::new(k as f64 * W, 0.0, angles.iter().copied(), ys.clone());
        p.frame(&mut body, "angle of xi", &format!("chi_{k}"));
        for (x, y) in angles.iter().zip(ys) {
            p.dot(&mut body, *x, y);
        }
    }
    Some(document(W * panels as f64, H, &body))
}

fn decay(records: &[Value]) -> Option<String> {
    let pts: Vec<(i64, f64, f64)> = records
        .iter()
        .filter_map(|r| {
            let (s, d) = (num(r, "s")?, num(r, "dist")?);
            (s > 0.0 && d > 0.0).then(|| {
                (
                    r.get("start").and_then(Value::as_i64).unwrap_or(0),
                    s.log10(),
                    d.log10(),
                )
            })
        })
        .collect();
    let p = Panel::new(0.0, 0.0, pts.iter().map(|t| t.1), pts.iter().map(|t| t.2));
    let mut body = String::new();
    p.frame(&mut body, "log10 s", "log10 dist");
    let mut i = 0;
    while i < pts.len() {
        let j = i + pts[i..].iter().take_while(|t| t.0 == pts[i].0).count();
        let line: Vec<(f64, f64)> = pts[i..j].iter().map(|t| (t.1, t.2)).collect();
        p.polyline(&mut body, &line);
        for (x, y) in line {
            p.dot(&mut body, x, y);
        }
        i = j;
    }
    Some(document(W, H, &body))
}

fn semilog(records: &[Value], field: &str) -> Option<String> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| {
            let (k, d) = (num(r, "k")?, num(r, field)?);
            (d > 0.0).then(|| (k, d.log10()))
        })
        .collect();
    let p = Panel::new(0.0, 0.0, pts.iter().map(|t| t.0), pts.iter().map(|t| t.1));
    let mut body = String::new();
    p.frame(&mut body, "k", &format!("log10 {field}"));
    p.polyline(&mut body, &pts);
    for (x, y) in &pts {
        p.dot(&mut body, *x, *y);
    }
    Some(document(W, H, &body))
}

fn histogram(records: &[Value]) -> Option<String> {
    let counts: Vec<f64> = records.iter().map(|r| num(r, "count")).collect::<Option<_>>()?;
    let n = counts.len() as f64;
    let p = Panel::new(0.0, 0.0, [0.0, n].into_iter(), counts.iter().copied().chain([0.0]));
    let mut body = String::new();
    p.frame(&mut body, "bin", "count");
    for (i, c) in counts.iter().enumerate() {
        let (x0, x1) = (p.px(i as f64), p.px(i as f64 + 1.0));
        let (y0, y1) = (p.py(*c), p.py(0.0));
        let _ = writeln!(
            body,
            r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="gray" stroke="black"/>"#,
            x1 - x0,
            y1 - y0
        );
    }
    Some(document(W, H, &body))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn picks_layout_from_fields() {
        let limit = vec![json!({"circle": [1.0, 0.0]}), json!({"circle": [0.0, 1.0]})];
        assert!(render(&limit).unwrap().contains("<circle"));
        let decay = vec![
            json!({"start": 0, "s": 1.0, "dist": 0.5}),
            json!({"start": 0, "s": 32.0, "dist": 0.01}),
            json!({"start": 1, "s": 1.0, "dist": 0.3}),
        ];
        assert_eq!(render(&decay).unwrap().matches("<polyline").count(), 2);
        let hist = vec![json!({"bin": 0, "count": 3}), json!({"bin": 1, "count": 5})];
        assert_eq!(render(&hist).unwrap().matches("fill=\"gray\"").count(), 2);
        assert!(render(&[json!({"residual": 1.0})]).is_none());
        assert!(render(&[]).is_none());
    }

    #[test]
    fn rendering_is_pure() {
        let recs = vec![
            json!({"xi_angle": 0.1, "chi": [0.6, 0.8]}),
            json!({"xi_angle": 0.2, "chi": [0.8, 0.6]}),
        ];
        assert_eq!(render(&recs), render(&recs));
    }
}
