//! Integer polynomial families with zero constant term.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// The family `P_1(d), ..., P_ell(d)` stored as its `ell x k` coefficient
/// matrix: `P_i(d) = c_i1 d + c_i2 d^2 + ... + c_ik d^k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolynomialFamily {
    coeffs: Vec<Vec<i64>>,
}

impl PolynomialFamily {
    /// Builds a family of maximal degree `k >= 2`. Trailing zero columns are
    /// dropped, so `k` is the true maximal degree.
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
        let fam = PolynomialFamily::with_any_degree(rows)?;
        if fam.k() < 2 {
            return Err(Error::InvalidDimension(fam.k()));
        }
        Ok(fam)
    }

    /// Like [`PolynomialFamily::new`] but also accepts linear families,
    /// which the configuration search handles just as well.
    pub fn with_any_degree(rows: Vec<Vec<i64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::param(
                "P",
                "family must contain at least one polynomial",
            ));
        }
        let k = rows
            .iter()
            .filter_map(|r| r.iter().rposition(|&c| c != 0).map(|j| j + 1))
            .max()
            .ok_or_else(|| Error::param("P", "every polynomial is identically zero"))?;
        let coeffs = rows
            .into_iter()
            .map(|mut r| {
                r.resize(k, 0);
                r
            })
            .collect();
        Ok(PolynomialFamily { coeffs })
    }

    /// The single monomial `d^k`.
    pub fn monomial(k: usize) -> Result<Self> {
        let mut row = vec![0; k];
        if k > 0 {
            row[k - 1] = 1;
        }
        PolynomialFamily::new(vec![row])
    }

    /// Number of polynomials.
    pub fn ell(&self) -> usize {
        self.coeffs.len()
    }

    /// Maximal degree.
    pub fn k(&self) -> usize {
        self.coeffs[0].len()
    }

    pub fn coeffs(&self) -> &[Vec<i64>] {
        &self.coeffs
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.coeffs[i]
    }

    /// `P_i(d)`, exactly.
    pub fn eval(&self, i: usize, d: i64) -> Result<i128> {
        let mut acc: i128 = 0;
        let mut power: i128 = 1;
        for &c in &self.coeffs[i] {
            power = power
                .checked_mul(d as i128)
                .ok_or(Error::Overflow("evaluating a polynomial"))?;
            acc = (c as i128)
                .checked_mul(power)
                .and_then(|t| acc.checked_add(t))
                .ok_or(Error::Overflow("evaluating a polynomial"))?;
        }
        Ok(acc)
    }

    /// `(P_1(d), ..., P_ell(d))`.
    pub fn eval_all(&self, d: i64) -> Result<Vec<i128>> {
        (0..self.ell()).map(|i| self.eval(i, d)).collect()
    }

    /// The linear map `b -> (sum_j c_ij b_j)_i`, so that
    /// `apply((d, d^2, ..., d^k)) = (P_1(d), ..., P_ell(d))`.
    pub fn apply(&self, b: &[i64]) -> Vec<i128> {
        self.coeffs
            .iter()
            .map(|row| {
                row.iter()
                    .zip(b)
                    .map(|(&c, &x)| c as i128 * x as i128)
                    .sum()
            })
            .collect()
    }

    /// Degree of `P_i` (0 for the zero polynomial).
    pub fn degree(&self, i: usize) -> usize {
        self.coeffs[i]
            .iter()
            .rposition(|&c| c != 0)
            .map_or(0, |j| j + 1)
    }

    /// Parses the micro-grammar: polynomials separated by `,` or `;`, each a
    /// sum of terms `c*d^j`, `c*d`, `d^j`, `d` joined by `+`/`-`. Constant
    /// terms are rejected since every `P_i(0)` must vanish.
    pub fn parse(src: &str) -> Result<Self> {
        let rows = src
            .split([',', ';'])
            .map(parse_polynomial)
            .collect::<Result<Vec<_>>>()?;
        PolynomialFamily::with_any_degree(rows)
    }
}

fn parse_polynomial(src: &str) -> Result<Vec<i64>> {
    let cleaned: String = src
        .chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| if c == '\u{2212}' { '-' } else { c })
        .collect();
    if cleaned.is_empty() {
        return Err(Error::Parse("empty polynomial".into()));
    }
    let mut coeffs: Vec<i64> = Vec::new();
    let mut terms: Vec<(i64, &str)> = Vec::new();
    let bytes = cleaned.as_bytes();
    let mut start = 0;
    let mut sign = 1i64;
    let mut i = 0;
    if bytes[0] == b'+' || bytes[0] == b'-' {
        sign = if bytes[0] == b'-' { -1 } else { 1 };
        start = 1;
        i = 1;
    }
    while i <= bytes.len() {
        let at_sep = i == bytes.len() || ((bytes[i] == b'+' || bytes[i] == b'-') && i > start);
        if at_sep {
            terms.push((sign, &cleaned[start..i]));
            if i < bytes.len() {
                sign = if bytes[i] == b'-' { -1 } else { 1 };
            }
            start = i + 1;
        }
        i += 1;
    }
    for (sign, term) in terms {
        if term.is_empty() {
            return Err(Error::Parse(format!("dangling operator in `{src}`")));
        }
        let (coef, degree) = parse_term(term)?;
        if degree == 0 {
            return Err(Error::Parse(format!(
                "constant term `{term}` in `{src}`: polynomials must vanish at 0"
            )));
        }
        if coeffs.len() < degree {
            coeffs.resize(degree, 0);
        }
        coeffs[degree - 1] = sign
            .checked_mul(coef)
            .and_then(|c| coeffs[degree - 1].checked_add(c))
            .ok_or(Error::Overflow("parsing coefficients"))?;
    }
    Ok(coeffs)
}

fn parse_term(term: &str) -> Result<(i64, usize)> {
    let bad = || Error::Parse(format!("cannot parse term `{term}`"));
    let (coef_part, var_part) = match term.find('d') {
        None => (term, None),
        Some(pos) => {
            let coef = term[..pos].trim_end_matches('*');
            (coef, Some(&term[pos + 1..]))
        }
    };
    let coef = if coef_part.is_empty() {
        1
    } else {
        coef_part.parse::<i64>().map_err(|_| bad())?
    };
    let degree = match var_part {
        None => 0,
        Some("") => 1,
        Some(rest) => {
            let exp = rest.strip_prefix('^').ok_or_else(bad)?;
            exp.parse::<usize>().map_err(|_| bad())?
        }
    };
    Ok((coef, degree))
}

impl fmt::Display for PolynomialFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            let mut first = true;
            for (j, &c) in row.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let deg = j + 1;
                let mag = c.unsigned_abs();
                if first {
                    if c < 0 {
                        write!(f, "-")?;
                    }
                } else {
                    write!(f, " {} ", if c < 0 { '-' } else { '+' })?;
                }
                first = false;
                if mag != 1 {
                    write!(f, "{mag}*")?;
                }
                if deg == 1 {
                    write!(f, "d")?;
                } else {
                    write!(f, "d^{deg}")?;
                }
            }
            if first {
                write!(f, "0")?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct FamilyRepr {
    ell: usize,
    k: usize,
    coeffs: Vec<Vec<String>>,
}

impl Serialize for PolynomialFamily {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FamilyRepr {
            ell: self.ell(),
            k: self.k(),
            coeffs: self
                .coeffs
                .iter()
                .map(|r| r.iter().map(|c| c.to_string()).collect())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolynomialFamily {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = FamilyRepr::deserialize(d)?;
        let rows = repr
            .coeffs
            .iter()
            .map(|r| {
                r.iter()
                    .map(|c| c.parse::<i64>().map_err(D::Error::custom))
                    .collect::<std::result::Result<Vec<_>, _>>()
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if rows.len() != repr.ell {
            return Err(D::Error::custom("`ell` does not match the number of rows"));
        }
        let fam = PolynomialFamily::with_any_degree(rows).map_err(D::Error::custom)?;
        if fam.k() != repr.k {
            return Err(D::Error::custom(
                "`k` does not match the coefficient matrix",
            ));
        }
        Ok(fam)
    }
}
