use serde::Serialize;

/// Common rendering of harness results.
pub trait Report: Serialize {
    fn title(&self) -> &'static str;

    fn passed(&self) -> bool;

    /// Key figures as `(name, value)` rows.
    fn rows(&self) -> Vec<(String, String)>;

    /// Problems found; empty on success.
    fn findings(&self) -> Vec<String> {
        Vec::new()
    }

    fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    fn to_markdown(&self) -> String {
        let mut out = format!(
            "# {}\n\n**Result:** {}\n\n| quantity | value |\n|---|---|\n",
            self.title(),
            if self.passed() { "pass" } else { "fail" }
        );
        for (k, v) in self.rows() {
            out.push_str(&format!("| {k} | {v} |\n"));
        }
        let findings = self.findings();
        if !findings.is_empty() {
            out.push_str("\n## Findings\n\n");
            for f in findings {
                out.push_str(&format!("- {f}\n"));
            }
        }
        out
    }
}
