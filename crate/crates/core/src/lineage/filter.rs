use serde::{Deserialize, Serialize};

/// Decides which edited lines are worth blaming.
///
/// A line is valid when it is not blank, not comment-only and not a
/// preprocessor include or header-guard line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LineFilter {
    pub skip_blank: bool,
    pub skip_comments: bool,
    pub skip_includes: bool,
    pub skip_guards: bool,
}

impl Default for LineFilter {
    fn default() -> Self {
        Self {
            skip_blank: true,
            skip_comments: true,
            skip_includes: true,
            skip_guards: true,
        }
    }
}

impl LineFilter {
    pub fn is_valid(&self, line: &str) -> bool {
        let t = line.trim();
        if t.is_empty() {
            return !self.skip_blank;
        }
        if self.skip_comments && is_comment_only(t) {
            return false;
        }
        if let Some(directive) = preprocessor(t) {
            if self.skip_includes && matches!(directive.0, "include" | "include_next" | "import") {
                return false;
            }
            if self.skip_guards && is_guard(directive) {
                return false;
            }
        }
        true
    }
}

fn is_comment_only(t: &str) -> bool {
    if t.starts_with("//") || t == "*" || t.starts_with("* ") || t.starts_with("*/") || t.starts_with("**") {
        return true;
    }
    if let Some(rest) = t.strip_prefix("/*") {
        // `/* ... */ code` still carries code after the comment.
        return match rest.find("*/") {
            Some(end) => {
                let after = rest[end + 2..].trim();
                after.is_empty() || is_comment_only(after)
            }
            None => true,
        };
    }
    false
}

/// `#  name  args` -> (name, args)
fn preprocessor(t: &str) -> Option<(&str, &str)> {
    let rest = t.strip_prefix('#')?.trim_start();
    let end = rest
        .find(|c: char| !c.is_ascii_alphanumeric() && c != '_')
        .unwrap_or(rest.len());
    Some((&rest[..end], rest[end..].trim()))
}

fn is_guard((name, args): (&str, &str)) -> bool {
    let symbol = args.split_whitespace().next().unwrap_or("");
    let guard_symbol = {
        let s = symbol.to_ascii_uppercase();
        s.ends_with("_H") || s.ends_with("_H_") || s.ends_with("_HPP") || s.ends_with("_H__")
    };
    match name {
        "pragma" => symbol == "once",
        "ifndef" => guard_symbol,
        "define" => guard_symbol && args.split_whitespace().nth(1).is_none(),
        "endif" => true,
        _ => false,
    }
}
