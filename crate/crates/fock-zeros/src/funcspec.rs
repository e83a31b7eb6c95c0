//! Parser for function descriptor strings:
//!
//! ```text
//! sigma [/ (z - w(m,n))]... [* poly(c0, c1, ...)]
//! ```
//!
//! `w(m,n)` is the lattice point with index (m, n); `poly` coefficients are
//! lowest-degree first and may be complex, written like `1.5`, `2i`,
//! `0.5-0.25i`. The grammar covers exactly the functions the verification
//! commands construct.

use crate::lattice::LatticeIndex;
use crate::sigma::SigmaEvaluator;
use crate::zeroseq::CanonicalFunction;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SpecParseError {
    #[error("descriptor must start with 'sigma', got {0:?}")]
    MissingSigma(String),
    #[error("expected {expected} at {rest:?}")]
    Expected { expected: &'static str, rest: String },
    #[error("bad integer {0:?} in lattice index")]
    BadInteger(String),
    #[error("bad number {0:?}")]
    BadNumber(String),
    #[error("poly needs at least one coefficient")]
    EmptyPoly,
    #[error("trailing input {0:?}")]
    Trailing(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuncSpec {
    pub removed: Vec<LatticeIndex>,
    /// Lowest-degree first; [1] when no poly factor was given.
    pub poly: Vec<Complex64>,
}

impl FuncSpec {
    pub fn parse(input: &str) -> Result<FuncSpec, SpecParseError> {
        let mut s = input.trim();
        s = s
            .strip_prefix("sigma")
            .ok_or_else(|| SpecParseError::MissingSigma(head(s)))?;
        let mut removed = Vec::new();
        let mut poly = vec![Complex64::new(1.0, 0.0)];

        loop {
            s = s.trim_start();
            if s.is_empty() {
                break;
            }
            if let Some(rest) = s.strip_prefix('/') {
                let (idx, rest) = divisor(rest.trim_start())?;
                removed.push(idx);
                s = rest;
            } else if let Some(rest) = s.strip_prefix('*') {
                let (coeffs, rest) = poly_factor(rest.trim_start())?;
                poly = coeffs;
                s = rest.trim_start();
                if !s.is_empty() {
                    return Err(SpecParseError::Trailing(head(s)));
                }
                break;
            } else {
                return Err(SpecParseError::Trailing(head(s)));
            }
        }
        Ok(FuncSpec { removed, poly })
    }

    pub fn function(&self, sigma: SigmaEvaluator) -> CanonicalFunction {
        CanonicalFunction::new(sigma, self.removed.clone(), Vec::new(), 0)
            .with_poly(self.poly.clone())
    }
}

fn head(s: &str) -> String {
    s.chars().take(24).collect()
}

fn expect<'a>(s: &'a str, token: &'static str) -> Result<&'a str, SpecParseError> {
    s.trim_start()
        .strip_prefix(token)
        .ok_or_else(|| SpecParseError::Expected {
            expected: token,
            rest: head(s),
        })
}

/// Parses `(z - w(m,n))` and returns the index.
fn divisor(s: &str) -> Result<(LatticeIndex, &str), SpecParseError> {
    let s = expect(s, "(")?;
    let s = expect(s, "z")?;
    let s = expect(s, "-")?;
    let s = expect(s, "w")?;
    let s = expect(s, "(")?;
    let (m, s) = integer(s)?;
    let s = expect(s, ",")?;
    let (n, s) = integer(s)?;
    let s = expect(s, ")")?;
    let s = expect(s, ")")?;
    Ok((LatticeIndex::new(m, n), s))
}

/// Parses `poly(c0, c1, ...)` and returns the coefficients.
fn poly_factor(s: &str) -> Result<(Vec<Complex64>, &str), SpecParseError> {
    let s = expect(s, "poly")?;
    let mut s = expect(s, "(")?;
    if s.trim_start().starts_with(')') {
        return Err(SpecParseError::EmptyPoly);
    }
    let mut coeffs = Vec::new();
    loop {
        let (c, rest) = number(s)?;
        coeffs.push(c);
        let rest = rest.trim_start();
        if let Some(r) = rest.strip_prefix(',') {
            s = r;
        } else if let Some(r) = rest.strip_prefix(')') {
            return Ok((coeffs, r));
        } else {
            return Err(SpecParseError::Expected {
                expected: ", or )",
                rest: head(rest),
            });
        }
    }
}

fn integer(s: &str) -> Result<(i64, &str), SpecParseError> {
    let s = s.trim_start();
    let end = s
        .char_indices()
        .take_while(|&(i, c)| c.is_ascii_digit() || (i == 0 && (c == '-' || c == '+')))
        .map(|(i, c)| i + c.len_utf8())
        .last()
        .unwrap_or(0);
    s[..end]
        .parse::<i64>()
        .map(|v| (v, &s[end..]))
        .map_err(|_| SpecParseError::BadInteger(head(s)))
}

fn number(s: &str) -> Result<(Complex64, &str), SpecParseError> {
    let s = s.trim_start();
    let end = s
        .find(|c: char| c == ',' || c == ')')
        .unwrap_or(s.len());
    let tok = s[..end].trim();
    if tok.is_empty() {
        return Err(SpecParseError::BadNumber(head(s)));
    }
    Ok((parse_complex(tok)?, &s[end..]))
}

/// `1.5`, `-2`, `i`, `-i`, `2i`, `1+2i`, `0.5-0.25i`, `1e-3+2e-4i`.
pub fn parse_complex(tok: &str) -> Result<Complex64, SpecParseError> {
    let tok = tok.trim();
    if tok.is_empty() {
        return Err(SpecParseError::BadNumber(tok.into()));
    }
    if !tok.ends_with('i') {
        return tok
            .parse::<f64>()
            .map(|re| Complex64::new(re, 0.0))
            .map_err(|_| SpecParseError::BadNumber(tok.into()));
    }
    let body = &tok[..tok.len() - 1];
    // split at the last +/- that is not a leading sign or an exponent sign
    let bytes = body.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        if (bytes[k] == b'+' || bytes[k] == b'-')
            && bytes[k - 1] != b'e'
            && bytes[k - 1] != b'E'
        {
            split = Some(k);
            break;
        }
    }
    let (re_str, im_str) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("", body),
    };
    let re = if re_str.is_empty() {
        0.0
    } else {
        re_str
            .parse::<f64>()
            .map_err(|_| SpecParseError::BadNumber(tok.into()))?
    };
    let im = match im_str {
        "" | "+" => 1.0,
        "-" => -1.0,
        _ => im_str
            .parse::<f64>()
            .map_err(|_| SpecParseError::BadNumber(tok.into()))?,
    };
    Ok(Complex64::new(re, im))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> Vec<Complex64> {
        vec![Complex64::new(1.0, 0.0)]
    }

    #[test]
    fn bare_sigma() {
        let f = FuncSpec::parse("sigma").unwrap();
        assert!(f.removed.is_empty());
        assert_eq!(f.poly, one());
        assert_eq!(FuncSpec::parse("  sigma  ").unwrap(), f);
    }

    #[test]
    fn divisor_chain() {
        let f = FuncSpec::parse("sigma / (z - w(0,0)) / (z - w(-1, 2))").unwrap();
        assert_eq!(
            f.removed,
            vec![LatticeIndex::new(0, 0), LatticeIndex::new(-1, 2)]
        );
        // spacing is free
        let g = FuncSpec::parse("sigma/(z-w(0,0))/(z-w(-1,2))").unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn poly_factor_parses_real_and_complex_coefficients() {
        let f = FuncSpec::parse("sigma * poly(1, 0, 2.5)").unwrap();
        assert_eq!(
            f.poly,
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(2.5, 0.0)
            ]
        );
        let g = FuncSpec::parse("sigma / (z - w(1,0)) * poly(0.5+0.5i, -i, 2i, 1e-3-2e-4i)")
            .unwrap();
        assert_eq!(g.removed, vec![LatticeIndex::new(1, 0)]);
        assert_eq!(
            g.poly,
            vec![
                Complex64::new(0.5, 0.5),
                Complex64::new(0.0, -1.0),
                Complex64::new(0.0, 2.0),
                Complex64::new(1e-3, -2e-4)
            ]
        );
    }

    #[test]
    fn malformed_specs_are_rejected() {
        assert!(matches!(
            FuncSpec::parse("sigm"),
            Err(SpecParseError::MissingSigma(_))
        ));
        assert!(FuncSpec::parse("sigma * (z - w(0,0))").is_err());
        assert!(FuncSpec::parse("sigma / (z - w(a,b))").is_err());
        assert!(FuncSpec::parse("sigma / (z + w(0,0))").is_err());
        assert!(FuncSpec::parse("sigma / (z - w(0,0)) junk").is_err());
        assert!(FuncSpec::parse("sigma * poly()").is_err());
        assert!(FuncSpec::parse("sigma * poly(1) extra").is_err());
        assert!(FuncSpec::parse("poly(1)").is_err());
    }

    #[test]
    fn complex_literals() {
        for (s, re, im) in [
            ("1.5", 1.5, 0.0),
            ("-2", -2.0, 0.0),
            ("i", 0.0, 1.0),
            ("-i", 0.0, -1.0),
            ("2i", 0.0, 2.0),
            ("1+2i", 1.0, 2.0),
            ("0.5-0.25i", 0.5, -0.25),
            ("1e-3+2e-4i", 1e-3, 2e-4),
            ("-1.5E2-2E-1i", -150.0, -0.2),
        ] {
            let c = parse_complex(s).unwrap();
            assert_eq!((c.re, c.im), (re, im), "{s}");
        }
        assert!(parse_complex("").is_err());
        assert!(parse_complex("1+2j").is_err());
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn sigma_prefix_must_be_exact_word() {
        // "sigmas" leaves trailing "s" which is not an operator
        assert!(FuncSpec::parse("sigmas").is_err());
    }
}
