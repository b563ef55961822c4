//! Signed Pauli words and their dense realization.

use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bits::site_mask;
use crate::{c, check_register, CMatrix, CVector, Error, Result};

/// One of the four units `i^k`, stored as the exponent `k mod 4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: i32) -> Phase {
        Phase(k.rem_euclid(4) as u8)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => c(1.0, 0.0),
            1 => c(0.0, 1.0),
            2 => c(-1.0, 0.0),
            _ => c(0.0, -1.0),
        }
    }

    fn parse(sign: &str) -> Option<Phase> {
        match sign {
            "" | "+" | "+1" | "1" => Some(Phase::ONE),
            "-" | "-1" => Some(Phase::MINUS_ONE),
            "i" | "+i" | "1i" | "+1i" => Some(Phase::I),
            "-i" | "-1i" => Some(Phase::MINUS_I),
            _ => None,
        }
    }

    fn prefix(self) -> &'static str {
        match self.0 {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        }
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    fn from_char(ch: char) -> Option<Letter> {
        match ch.to_ascii_uppercase() {
            'I' => Some(Letter::I),
            'X' => Some(Letter::X),
            'Y' => Some(Letter::Y),
            'Z' => Some(Letter::Z),
            _ => None,
        }
    }

    fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }

    /// Single-site product `self * rhs` as (phase, letter), with `XY = iZ` cyclically.
    pub fn product(self, rhs: Letter) -> (Phase, Letter) {
        use Letter::*;
        match (self, rhs) {
            (I, p) | (p, I) => (Phase::ONE, p),
            (a, b) if a == b => (Phase::ONE, I),
            (X, Y) => (Phase::I, Z),
            (Y, Z) => (Phase::I, X),
            (Z, X) => (Phase::I, Y),
            (Y, X) => (Phase::MINUS_I, Z),
            (Z, Y) => (Phase::MINUS_I, X),
            (X, Z) => (Phase::MINUS_I, Y),
            _ => unreachable!(),
        }
    }
}

/// A signed tensor product of single-qubit Paulis, `phase * P_1 (x) ... (x) P_N`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    phase: Phase,
    letters: Vec<Letter>,
}

impl PauliString {
    pub fn new(phase: Phase, letters: Vec<Letter>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::EmptyRegister);
        }
        Ok(PauliString { phase, letters })
    }

    pub fn identity(n: usize) -> Result<Self> {
        PauliString::new(Phase::ONE, vec![Letter::I; n])
    }

    /// Build from `(letter, site)` pairs with 1-based sites; unlisted sites are `I`.
    pub fn from_sites(phase: Phase, sites: &[(Letter, usize)], n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyRegister);
        }
        let mut letters = vec![Letter::I; n];
        let mut seen = vec![false; n];
        for &(letter, site) in sites {
            if site == 0 || site > n {
                return Err(Error::SiteOutOfRange { site, n });
            }
            if seen[site - 1] {
                return Err(Error::DuplicateSite(site));
            }
            seen[site - 1] = true;
            letters[site - 1] = letter;
        }
        Ok(PauliString { phase, letters })
    }

    /// Parse `"-YYZ"`, `"+iXIZI"`, or the site-pair form `"-Y1 Y2 Z3"` for an `n`-qubit register.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let malformed = |reason: &str| Error::MalformedPauli {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let trimmed = text.trim();
        let body_start = trimmed
            .find(|ch: char| Letter::from_char(ch).is_some() && ch != 'i')
            .ok_or_else(|| malformed("no Pauli letters"))?;
        let (sign, body) = trimmed.split_at(body_start);
        let phase = Phase::parse(sign.trim()).ok_or_else(|| malformed("bad sign prefix"))?;

        if body.chars().any(|ch| ch.is_ascii_digit()) {
            let mut pairs = Vec::new();
            let mut chars = body.chars().filter(|ch| !ch.is_whitespace() && *ch != ',' && *ch != '*').peekable();
            while let Some(ch) = chars.next() {
                let letter = Letter::from_char(ch).ok_or_else(|| malformed("expected a Pauli letter"))?;
                let mut digits = String::new();
                while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                    digits.push(*d);
                    chars.next();
                }
                let site: usize = digits.parse().map_err(|_| malformed("letter without a site index"))?;
                pairs.push((letter, site));
            }
            PauliString::from_sites(phase, &pairs, n)
        } else {
            let letters = body
                .chars()
                .filter(|ch| !ch.is_whitespace())
                .map(|ch| Letter::from_char(ch).ok_or_else(|| malformed("unexpected character")))
                .collect::<Result<Vec<_>>>()?;
            if letters.len() != n {
                return Err(malformed(&format!("expected {n} letters, found {}", letters.len())));
            }
            PauliString::new(phase, letters)
        }
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&l| l == Letter::I)
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    /// Multiply the overall phase by `factor`.
    pub fn scaled(mut self, factor: Phase) -> Self {
        self.phase = self.phase * factor;
        self
    }

    /// Operator product `self * rhs`, accumulating the phase.
    pub fn product(&self, rhs: &PauliString) -> Result<PauliString> {
        if self.len() != rhs.len() {
            return Err(Error::LengthMismatch { left: self.len(), right: rhs.len() });
        }
        let mut phase = self.phase * rhs.phase;
        let letters = self
            .letters
            .iter()
            .zip(&rhs.letters)
            .map(|(&a, &b)| {
                let (p, l) = a.product(b);
                phase = phase * p;
                l
            })
            .collect();
        Ok(PauliString { phase, letters })
    }

    /// Two Pauli words commute iff they anticommute on an even number of sites.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        self.letters
            .iter()
            .zip(&other.letters)
            .filter(|(&a, &b)| a != Letter::I && b != Letter::I && a != b)
            .count()
            % 2
            == 0
    }

    /// Is the operator Hermitian (phase real)?
    pub fn is_hermitian(&self) -> bool {
        self.phase.power() % 2 == 0
    }

    /// Column action: `P|b> = amp * |target>`.
    #[inline]
    fn column(&self, b: usize) -> (usize, Complex64) {
        let n = self.len();
        let mut target = b;
        // each Y contributes i on |0> and -i on |1>; each Z contributes -1 on |1>
        let mut power = self.phase.power() as i32;
        for (site, &letter) in self.letters.iter().enumerate() {
            let mask = site_mask(site, n);
            let one = b & mask != 0;
            match letter {
                Letter::I => {}
                Letter::X => target ^= mask,
                Letter::Y => {
                    target ^= mask;
                    power += if one { 3 } else { 1 };
                }
                Letter::Z => {
                    if one {
                        power += 2;
                    }
                }
            }
        }
        (target, Phase::from_power(power).to_complex())
    }

    /// Dense `2^n x 2^n` matrix; site 1 is the most significant tensor factor.
    pub fn realize(&self) -> Result<CMatrix> {
        let n = self.len();
        check_register(n)?;
        let dim = 1usize << n;
        let mut m = CMatrix::zeros(dim, dim);
        for b in 0..dim {
            let (row, amp) = self.column(b);
            m[(row, b)] = amp;
        }
        Ok(m)
    }

    /// Apply to a state vector without building the matrix.
    pub fn apply(&self, v: &CVector) -> Result<CVector> {
        let dim = 1usize << self.len();
        if v.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
        }
        let mut out = CVector::zeros(dim);
        for b in 0..dim {
            let (row, amp) = self.column(b);
            out[row] += amp * v[b];
        }
        Ok(out)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.phase.prefix())?;
        for l in &self.letters {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

/// Config form of a Pauli word: either `"-YYZ"` or `{"sign": "-1", "word": "YYZ"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PauliText {
    Text(String),
    Structured { sign: String, word: String },
}

impl PauliText {
    pub fn resolve(&self, n: usize) -> Result<PauliString> {
        match self {
            PauliText::Text(t) => PauliString::parse(t, n),
            PauliText::Structured { sign, word } => {
                let phase = Phase::parse(sign.trim()).ok_or_else(|| Error::MalformedPauli {
                    text: format!("{sign}{word}"),
                    reason: "bad sign".into(),
                })?;
                Ok(PauliString::parse(word, n)?.scaled(phase))
            }
        }
    }
}

impl From<&PauliString> for PauliText {
    fn from(p: &PauliString) -> Self {
        PauliText::Text(p.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(text: &str) -> PauliString {
        PauliString::parse(text, text.trim_start_matches(['+', '-', 'i']).len()).unwrap()
    }

    #[test]
    fn parse_examples() {
        let w = PauliString::parse("-YYZ", 3).unwrap();
        assert_eq!(w.phase(), Phase::MINUS_ONE);
        assert_eq!(w.letters(), &[Letter::Y, Letter::Y, Letter::Z]);
        let id = PauliString::parse("III", 3).unwrap();
        assert!(id.is_identity());
        assert_eq!(id.phase(), Phase::ONE);
        let w = PauliString::parse("XIZI", 4).unwrap();
        assert_eq!(w.letters(), &[Letter::X, Letter::I, Letter::Z, Letter::I]);
    }

    #[test]
    fn parse_site_pairs() {
        let w = PauliString::parse("-Y1 Y2 Z3", 3).unwrap();
        assert_eq!(w, PauliString::parse("-YYZ", 3).unwrap());
        let w = PauliString::parse("Z1 Z3", 4).unwrap();
        assert_eq!(w.to_string(), "+ZIZI");
        assert_eq!(PauliString::parse("+iX2", 2).unwrap().phase(), Phase::I);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(PauliString::parse("XQZ", 3), Err(Error::MalformedPauli { .. })));
        assert!(matches!(PauliString::parse("XX", 3), Err(Error::MalformedPauli { .. })));
        assert!(matches!(PauliString::parse("*XX", 2), Err(Error::MalformedPauli { .. })));
        assert_eq!(PauliString::parse("X4", 3), Err(Error::SiteOutOfRange { site: 4, n: 3 }));
        assert_eq!(PauliString::parse("X1 Z1", 3), Err(Error::DuplicateSite(1)));
    }

    #[test]
    fn product_examples() {
        // i * X_L * Z_L for the three-qubit code
        let xl = p("-YYZ");
        let zl = p("XXX");
        let yl = xl.product(&zl).unwrap().scaled(Phase::I);
        assert_eq!(yl.letters(), &[Letter::Z, Letter::Z, Letter::Y]);
        assert_eq!(yl.phase(), Phase::MINUS_ONE);

        let xx = p("X").product(&p("X")).unwrap();
        assert!(xx.is_identity());
        assert_eq!(xx.phase(), Phase::ONE);

        let xz = p("X").product(&p("Z")).unwrap();
        assert_eq!(xz.letters(), &[Letter::Y]);
        assert_eq!(xz.phase(), Phase::MINUS_I);
    }

    #[test]
    fn xz_matches_matrix_product() {
        // brute-force 2x2 check of X*Z = -iY
        let x = p("X").realize().unwrap();
        let z = p("Z").realize().unwrap();
        let minus_i_y = p("-iY").realize().unwrap();
        assert!((x * z - minus_i_y).norm() < 1e-15);
    }

    #[test]
    fn product_length_mismatch() {
        assert_eq!(
            p("XX").product(&p("XXX")),
            Err(Error::LengthMismatch { left: 2, right: 3 })
        );
    }

    #[test]
    fn realize_z_and_total_z() {
        let z = p("Z").realize().unwrap();
        assert_eq!(z[(0, 0)], c(1.0, 0.0));
        assert_eq!(z[(1, 1)], c(-1.0, 0.0));
        let total: CMatrix = ["ZII", "IZI", "IIZ"].iter().map(|w| p(w).realize().unwrap()).sum();
        let b = crate::bits::index_of("110").unwrap();
        assert_eq!(total[(b, b)], c(-1.0, 0.0));
    }

    #[test]
    fn realize_is_involution() {
        let s1 = p("YXY").realize().unwrap();
        assert!((&s1 * &s1 - CMatrix::identity(8, 8)).norm() < 1e-14);
    }

    #[test]
    fn realize_rejects_large_register() {
        let big = PauliString::identity(13).unwrap();
        assert_eq!(big.realize(), Err(Error::RegisterTooLarge(13)));
    }

    #[test]
    fn structured_text() {
        let t: PauliText = serde_json::from_str(r#"{"sign": "-1", "word": "YYZ"}"#).unwrap();
        assert_eq!(t.resolve(3).unwrap(), p("-YYZ"));
        let t: PauliText = serde_json::from_str(r#""+XYY""#).unwrap();
        assert_eq!(t.resolve(3).unwrap(), p("XYY"));
    }

    #[test]
    fn total_z_eigenvalue_is_magnetization() {
        for n in 1..=5 {
            let total: CMatrix = (1..=n)
                .map(|k| PauliString::from_sites(Phase::ONE, &[(Letter::Z, k)], n).unwrap().realize().unwrap())
                .sum();
            for b in 0..1usize << n {
                let m = crate::bits::magnetization(b, n).unwrap() as f64;
                let mut ket = CVector::zeros(1 << n);
                ket[b] = c(1.0, 0.0);
                assert!((&total * &ket - ket * c(m, 0.0)).norm() < 1e-14);
            }
        }
    }

    fn word(n: usize) -> impl Strategy<Value = PauliString> {
        (0u8..4, proptest::collection::vec(0u8..4, n)).prop_map(|(ph, ls)| {
            let letters = ls
                .into_iter()
                .map(|l| [Letter::I, Letter::X, Letter::Y, Letter::Z][l as usize])
                .collect();
            PauliString::new(Phase::from_power(ph as i32), letters).unwrap()
        })
    }

    proptest! {
        #[test]
        fn product_realizes_as_matrix_product((a, b) in (1usize..=4).prop_flat_map(|n| (word(n), word(n)))) {
            let ab = a.product(&b).unwrap().realize().unwrap();
            let direct = a.realize().unwrap() * b.realize().unwrap();
            prop_assert!((ab - direct).norm() < 1e-12);
        }

        #[test]
        fn product_is_associative((a, b, d) in (1usize..=4).prop_flat_map(|n| (word(n), word(n), word(n)))) {
            let left = a.product(&b).unwrap().product(&d).unwrap();
            let right = a.product(&b.product(&d).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn commutation_matches_matrices((a, b) in (1usize..=3).prop_flat_map(|n| (word(n), word(n)))) {
            let (ma, mb) = (a.realize().unwrap(), b.realize().unwrap());
            let commutator = &ma * &mb - &mb * &ma;
            prop_assert_eq!(a.commutes_with(&b), commutator.norm() < 1e-12);
        }

        #[test]
        fn apply_matches_realize(a in word(3), re in proptest::collection::vec(-1.0f64..1.0, 8)) {
            let v = CVector::from_iterator(8, re.iter().map(|&x| c(x, 0.5 * x)));
            let direct = a.realize().unwrap() * &v;
            prop_assert!((a.apply(&v).unwrap() - direct).norm() < 1e-12);
        }
    }
}
