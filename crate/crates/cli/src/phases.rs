//! Phase arguments are radians, written either as a decimal or with a
//! `pi` literal: `pi`, `-pi`, `pi/4`, `-3pi/4`, `2pi`, `0.5pi/3`.

use std::f64::consts::PI;

pub fn parse_phase(text: &str) -> Result<f64, String> {
    let trimmed = text.trim();
    let value = if let Some(split) = trimmed.find("pi") {
        let head = &trimmed[..split];
        let tail = &trimmed[split + 2..];
        let coefficient = match head {
            "" | "+" => 1.0,
            "-" => -1.0,
            number => number
                .parse::<f64>()
                .map_err(|_| format!("bad multiplier '{number}' in phase '{text}'"))?,
        };
        let divisor = if tail.is_empty() {
            1.0
        } else if let Some(number) = tail.strip_prefix('/') {
            let divisor = number
                .parse::<f64>()
                .map_err(|_| format!("bad divisor '{number}' in phase '{text}'"))?;
            if divisor == 0.0 {
                return Err(format!("division by zero in phase '{text}'"));
            }
            divisor
        } else {
            return Err(format!(
                "unsupported phase syntax '{text}'; try a decimal, 'pi/4', or '-3pi/4'"
            ));
        };
        coefficient * PI / divisor
    } else {
        trimmed
            .parse::<f64>()
            .map_err(|_| format!("invalid phase '{text}'; try a decimal, 'pi/4', or '-3pi/4'"))?
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("phase '{text}' is not finite"))
    }
}

pub fn parse_phase_pair(text: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(format!(
            "expected two comma-separated phases, got '{text}'"
        ));
    }
    Ok([parse_phase(parts[0])?, parse_phase(parts[1])?])
}

pub fn parse_phase_octet(text: &str) -> Result<[f64; 8], String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 8 {
        return Err(format!(
            "expected eight comma-separated phases, got {} in '{text}'",
            parts.len()
        ));
    }
    let mut phases = [0.0; 8];
    for (slot, part) in phases.iter_mut().zip(parts) {
        *slot = parse_phase(part)?;
    }
    Ok(phases)
}
