//! Numeric rendering. Every number the tool prints, in any format, is
//! rounded to 12 significant digits first so reports are stable and
//! re-ingestable without trailing float noise.

use anyhow::Context;
use std::path::Path;

pub fn round_sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x + 0.0;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

pub fn sig12(x: f64) -> String {
    format!("{}", round_sig12(x))
}

pub fn fmt_complex(re: f64, im: f64) -> String {
    let re = round_sig12(re);
    let im = round_sig12(im);
    if im == 0.0 {
        format!("{re}")
    } else if re == 0.0 {
        format!("{im}i")
    } else if im < 0.0 {
        format!("{re} - {}i", -im)
    } else {
        format!("{re} + {im}i")
    }
}

/// Round every float in a JSON tree to 12 significant digits; integers
/// pass through untouched.
pub fn round_json(value: &mut serde_json::Value) {
    match value {
        serde_json::Value::Number(number) => {
            if number.is_f64() {
                let rounded = round_sig12(number.as_f64().unwrap_or(0.0));
                if let Some(replacement) = serde_json::Number::from_f64(rounded) {
                    *number = replacement;
                }
            }
        }
        serde_json::Value::Array(items) => {
            for item in items {
                round_json(item);
            }
        }
        serde_json::Value::Object(map) => {
            for item in map.values_mut() {
                round_json(item);
            }
        }
        _ => {}
    }
}

pub fn to_json_string(value: &serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(value).unwrap_or_else(|_| "null".into());
    text.push('\n');
    text
}

pub fn emit(path: Option<&Path>, content: &str) -> anyhow::Result<()> {
    match path {
        Some(path) => std::fs::write(path, content)
            .with_context(|| format!("writing output to {}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}
