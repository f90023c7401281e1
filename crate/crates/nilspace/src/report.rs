//! Structured pass/fail reports: a titled list of violations plus free-form
//! metrics, renderable as line-oriented text or JSON.

use serde::Serialize;

/// How many violation items a report keeps verbatim; anything beyond is
/// counted but not stored, so exhaustive checks on large spaces stay cheap.
pub const MAX_ITEMS: usize = 50;

/// A single violation or finding.
#[derive(Debug, Clone, Serialize)]
pub struct ReportItem {
    /// Short machine-readable category, e.g. `missing-face`.
    pub kind: String,
    /// Human-readable detail naming the offending objects.
    pub detail: String,
}

/// Outcome of one check: empty item list means the property holds.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub title: String,
    pub items: Vec<ReportItem>,
    /// Violations beyond `MAX_ITEMS` that were counted but not stored.
    pub omitted: usize,
    /// Key/value facts gathered along the way (counts, timings, degrees).
    pub metrics: Vec<(String, String)>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Report { title: title.into(), items: Vec::new(), omitted: 0, metrics: Vec::new() }
    }

    pub fn push(&mut self, kind: impl Into<String>, detail: impl Into<String>) {
        if self.items.len() < MAX_ITEMS {
            self.items.push(ReportItem { kind: kind.into(), detail: detail.into() });
        } else {
            self.omitted += 1;
        }
    }

    pub fn metric(&mut self, key: impl Into<String>, value: impl ToString) {
        self.metrics.push((key.into(), value.to_string()));
    }

    /// Total number of violations, including uncounted ones.
    pub fn violations(&self) -> usize {
        self.items.len() + self.omitted
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0
    }

    /// Fold a sub-report into this one, prefixing its items.
    pub fn absorb(&mut self, sub: Report) {
        for item in sub.items {
            self.push(item.kind, format!("[{}] {}", sub.title, item.detail));
        }
        self.omitted += sub.omitted;
        for (k, v) in sub.metrics {
            self.metrics.push((format!("{}.{}", sub.title, k), v));
        }
    }

    /// Line-oriented rendering: `key: value` metrics, one line per violation,
    /// and a final `status:` line.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("check: {}\n", self.title));
        for (k, v) in &self.metrics {
            out.push_str(&format!("{}: {}\n", k, v));
        }
        for item in &self.items {
            out.push_str(&format!("violation[{}]: {}\n", item.kind, item.detail));
        }
        if self.omitted > 0 {
            out.push_str(&format!("violations-omitted: {}\n", self.omitted));
        }
        out.push_str(&format!("status: {}\n", if self.passed() { "pass" } else { "fail" }));
        out
    }

    pub fn render_json(&self) -> String {
        #[derive(Serialize)]
        struct Jsonable<'a> {
            title: &'a str,
            status: &'a str,
            items: &'a [ReportItem],
            omitted: usize,
            metrics: &'a [(String, String)],
        }
        serde_json::to_string_pretty(&Jsonable {
            title: &self.title,
            status: if self.passed() { "pass" } else { "fail" },
            items: &self.items,
            omitted: self.omitted,
            metrics: &self.metrics,
        })
        .expect("report serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_passes() {
        let mut r = Report::new("demo");
        r.metric("cubes", 12);
        assert!(r.passed());
        let text = r.render_text();
        assert!(text.contains("status: pass"));
        assert!(text.contains("cubes: 12"));
    }

    #[test]
    fn items_cap_counts_overflow() {
        let mut r = Report::new("cap");
        for i in 0..(MAX_ITEMS + 7) {
            r.push("x", format!("item {i}"));
        }
        assert_eq!(r.items.len(), MAX_ITEMS);
        assert_eq!(r.omitted, 7);
        assert_eq!(r.violations(), MAX_ITEMS + 7);
        assert!(!r.passed());
        assert!(r.render_text().contains("status: fail"));
    }

    #[test]
    fn json_rendering_is_valid() {
        let mut r = Report::new("j");
        r.push("kind", "detail");
        let v: serde_json::Value = serde_json::from_str(&r.render_json()).unwrap();
        assert_eq!(v["status"], "fail");
        assert_eq!(v["items"][0]["kind"], "kind");
    }
}
