//! Named curves and `--curve` argument resolution.

use std::path::Path;

use koszul_core::curve::{CurveModel, CurveSpec};
use koszul_core::field::PrimeField;

use crate::error::{HarnessError, Result};

pub const PRESETS: [&str; 4] = ["g2hyp", "g3quartic", "g4hyp", "g5hyp"];

/// `y^2 = f(x)` coefficients, constant term first. Squarefree modulo 10007 and 32003.
const G4_F: [i64; 10] = [1, 3, 0, -2, 0, 0, 0, 0, 0, 1];
const G5_F: [i64; 12] = [2, 0, 1, 0, 0, -1, 0, 0, 0, 0, 0, 1];

pub fn preset(name: &str, prime: u32) -> Result<CurveModel> {
    let field = PrimeField::new(prime)?;
    let curve = match name {
        "g2hyp" => CurveModel::hyperelliptic(field, &[1, 0, 0, 0, 0, 1])?,
        "g3quartic" => CurveModel::plane(field, &[[4, 0, 0, 1], [0, 4, 0, 1], [0, 0, 4, 1]])?,
        "g4hyp" => CurveModel::hyperelliptic(field, &G4_F)?,
        "g5hyp" => CurveModel::hyperelliptic(field, &G5_F)?,
        _ => return Err(HarnessError::Usage(format!("unknown preset {name:?}; expected one of {PRESETS:?}"))),
    };
    Ok(curve)
}

/// Resolves a preset name, an inline JSON curve description or a path to
/// one. `prime` overrides the description's `p` when given.
pub fn resolve_curve(arg: &str, prime: Option<u32>) -> Result<CurveModel> {
    if PRESETS.contains(&arg) {
        return preset(arg, prime.unwrap_or(koszul_core::field::DEFAULT_PRIME));
    }
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else if Path::new(arg).is_file() {
        std::fs::read_to_string(arg).map_err(|e| HarnessError::io(arg, e))?
    } else {
        return Err(HarnessError::Usage(format!("--curve {arg:?} is neither a preset, inline JSON nor a readable file")));
    };
    let mut spec: CurveSpec = serde_json::from_str(&text)?;
    if let Some(p) = prime {
        spec.p = p;
    }
    Ok(CurveModel::from_spec(&spec)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use koszul_core::field::{DEFAULT_PRIME, DEFAULT_SECONDARY_PRIME};

    #[test]
    fn presets_build_at_both_primes() {
        for name in PRESETS {
            for p in [DEFAULT_PRIME, DEFAULT_SECONDARY_PRIME] {
                let c = preset(name, p).unwrap();
                assert_eq!(c.field().modulus(), p);
            }
        }
        assert_eq!(preset("g4hyp", DEFAULT_PRIME).unwrap().genus(), 4);
        assert_eq!(preset("g5hyp", DEFAULT_PRIME).unwrap().genus(), 5);
        assert_eq!(preset("g3quartic", DEFAULT_PRIME).unwrap().gonality(), Some(3));
    }

    #[test]
    fn inline_json_and_prime_override() {
        let c = resolve_curve(r#"{"kind":"hyperelliptic","p":10007,"coefficients":[1,0,0,0,0,1]}"#, Some(32003)).unwrap();
        assert_eq!(c.field().modulus(), 32003);
        assert!(resolve_curve("nonsense", None).unwrap_err().is_usage());
    }
}
