//! Decimal (base-10) chromosome encoding of real strategy vectors.
//!
//! Each variable is one sign digit followed by `magnitude_digits` magnitude
//! digits; sign digits 0-4 read as positive, 5-9 as negative, and the decimal
//! point sits after `decimal_position` magnitude digits. Decoding is total on
//! digit strings, so genetic operators stay closed over chromosomes; encoding
//! canonicalizes the sign digit to 0 (non-negative) or 5 (negative).

use std::ops::Range;

use rand::Rng;
use thiserror::Error;

use crate::real::Real;
use crate::space::{Interval, SearchSpace};

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("magnitude_digits must be in 1..=15, got {0}")]
    BadMagnitudeDigits(usize),
    #[error("decimal_position {decimal_position} exceeds magnitude_digits {magnitude_digits}")]
    BadDecimalPosition { decimal_position: usize, magnitude_digits: usize },
    #[error("variable_count must be positive")]
    NoVariables,
    #[error("player_slices must partition 0..{variable_count} without gaps or overlaps")]
    BadSlices { variable_count: usize },
    #[error("variable {index}: |{value}| exceeds the representable magnitude {max}")]
    OutOfRange { index: usize, value: f64, max: f64 },
    #[error("variable {index}: value is not finite")]
    NonFinite { index: usize },
    #[error("chromosome length {got} does not match scheme length {expected}")]
    BadLength { got: usize, expected: usize },
    #[error("digit {value} at position {index} is outside 0..=9")]
    BadDigit { index: usize, value: u8 },
    #[error("bounds for variable {index} are not representable in the scheme")]
    UnrepresentableBounds { index: usize },
}

/// Layout of a chromosome over the decision variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodingScheme {
    magnitude_digits: usize,
    decimal_position: usize,
    variable_count: usize,
    player_slices: Vec<Range<usize>>,
}

impl EncodingScheme {
    pub fn new(
        magnitude_digits: usize,
        decimal_position: usize,
        variable_count: usize,
        player_slices: Vec<Range<usize>>,
    ) -> Result<Self, EncodeError> {
        if magnitude_digits == 0 || magnitude_digits > 15 {
            return Err(EncodeError::BadMagnitudeDigits(magnitude_digits));
        }
        if decimal_position > magnitude_digits {
            return Err(EncodeError::BadDecimalPosition { decimal_position, magnitude_digits });
        }
        if variable_count == 0 {
            return Err(EncodeError::NoVariables);
        }
        let mut cursor = 0;
        for slice in &player_slices {
            if slice.start != cursor || slice.end <= slice.start {
                return Err(EncodeError::BadSlices { variable_count });
            }
            cursor = slice.end;
        }
        if cursor != variable_count {
            return Err(EncodeError::BadSlices { variable_count });
        }
        Ok(Self { magnitude_digits, decimal_position, variable_count, player_slices })
    }

    /// Scheme covering a search space's variables, checking that every bound
    /// fits inside the representable magnitude.
    pub fn for_space<R: Real>(
        magnitude_digits: usize,
        decimal_position: usize,
        space: &SearchSpace<R>,
    ) -> Result<Self, EncodeError> {
        let scheme = Self::new(
            magnitude_digits,
            decimal_position,
            space.total_dim(),
            space.player_slices().to_vec(),
        )?;
        let max = scheme.max_magnitude();
        for (index, b) in space.bounds().iter().enumerate() {
            if b.lo().as_f64().abs() > max || b.hi().as_f64().abs() > max {
                return Err(EncodeError::UnrepresentableBounds { index });
            }
        }
        Ok(scheme)
    }

    pub fn magnitude_digits(&self) -> usize {
        self.magnitude_digits
    }

    pub fn decimal_position(&self) -> usize {
        self.decimal_position
    }

    pub fn variable_count(&self) -> usize {
        self.variable_count
    }

    pub fn player_slices(&self) -> &[Range<usize>] {
        &self.player_slices
    }

    pub fn digits_per_variable(&self) -> usize {
        1 + self.magnitude_digits
    }

    pub fn chromosome_len(&self) -> usize {
        self.variable_count * self.digits_per_variable()
    }

    /// The digit range owned by one player's variables.
    pub fn digit_slice(&self, player: usize) -> Range<usize> {
        let vars = &self.player_slices[player];
        vars.start * self.digits_per_variable()..vars.end * self.digits_per_variable()
    }

    /// Integer denominator `10^(magnitude_digits - decimal_position)`.
    fn denominator(&self) -> u64 {
        10u64.pow((self.magnitude_digits - self.decimal_position) as u32)
    }

    /// Grid resolution `10^(decimal_position - magnitude_digits)`.
    pub fn quantization_step(&self) -> f64 {
        1.0 / self.denominator() as f64
    }

    /// Largest representable magnitude `(10^magnitude_digits - 1) * step`.
    pub fn max_magnitude(&self) -> f64 {
        let max_int = 10u64.pow(self.magnitude_digits as u32) - 1;
        max_int as f64 / self.denominator() as f64
    }
}

/// Digit string; every digit is in 0..=9.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chromosome {
    digits: Vec<u8>,
}

impl Chromosome {
    pub fn from_digits(digits: Vec<u8>, scheme: &EncodingScheme) -> Result<Self, EncodeError> {
        if digits.len() != scheme.chromosome_len() {
            return Err(EncodeError::BadLength {
                got: digits.len(),
                expected: scheme.chromosome_len(),
            });
        }
        for (index, &value) in digits.iter().enumerate() {
            if value > 9 {
                return Err(EncodeError::BadDigit { index, value });
            }
        }
        Ok(Self { digits })
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub(crate) fn digits_mut(&mut self) -> &mut [u8] {
        &mut self.digits
    }

    /// Overwrite a digit range from another chromosome's matching range.
    pub(crate) fn copy_range_from(&mut self, range: Range<usize>, source: &[u8]) {
        self.digits[range.clone()].copy_from_slice(&source[range]);
    }
}

/// Decode every variable: sign digit in 0..=4 means positive, 5..=9 negative;
/// the magnitude digits form a base-10 integer scaled by the quantization step.
pub fn decode<R: Real>(chromosome: &Chromosome, scheme: &EncodingScheme) -> Vec<R> {
    debug_assert_eq!(chromosome.len(), scheme.chromosome_len());
    let dpv = scheme.digits_per_variable();
    let denom = R::of(scheme.denominator() as f64);
    (0..scheme.variable_count())
        .map(|v| {
            let d = &chromosome.digits()[v * dpv..(v + 1) * dpv];
            let sign = if d[0] <= 4 { R::one() } else { -R::one() };
            let mut magnitude: u64 = 0;
            for &digit in &d[1..] {
                magnitude = magnitude * 10 + digit as u64;
            }
            sign * (R::of(magnitude as f64) / denom)
        })
        .collect()
}

/// Encode values onto the quantization grid, rounding half away from zero.
pub fn encode<R: Real>(values: &[R], scheme: &EncodingScheme) -> Result<Chromosome, EncodeError> {
    if values.len() != scheme.variable_count() {
        return Err(EncodeError::BadLength {
            got: values.len() * scheme.digits_per_variable(),
            expected: scheme.chromosome_len(),
        });
    }
    let denom = R::of(scheme.denominator() as f64);
    let max_int = 10u64.pow(scheme.magnitude_digits() as u32) - 1;
    let mut digits = Vec::with_capacity(scheme.chromosome_len());
    for (index, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(EncodeError::NonFinite { index });
        }
        let scaled = (v.abs() * denom + R::of(0.5)).floor();
        let magnitude = scaled
            .to_u64()
            .ok_or(EncodeError::NonFinite { index })?;
        if magnitude > max_int {
            return Err(EncodeError::OutOfRange {
                index,
                value: v.as_f64(),
                max: scheme.max_magnitude(),
            });
        }
        digits.push(if v < R::zero() { 5 } else { 0 });
        let mut divisor = if scheme.magnitude_digits() > 1 {
            10u64.pow(scheme.magnitude_digits() as u32 - 1)
        } else {
            1
        };
        for _ in 0..scheme.magnitude_digits() {
            digits.push(((magnitude / divisor) % 10) as u8);
            divisor = (divisor / 10).max(1);
        }
    }
    Chromosome::from_digits(digits, scheme)
}

/// Uniformly sample decoded values within per-variable bounds, then encode.
pub fn random_chromosome<R: Real>(
    scheme: &EncodingScheme,
    bounds: &[Interval<R>],
    rng: &mut impl Rng,
) -> Result<Chromosome, EncodeError> {
    if bounds.len() != scheme.variable_count() {
        return Err(EncodeError::BadLength {
            got: bounds.len() * scheme.digits_per_variable(),
            expected: scheme.chromosome_len(),
        });
    }
    let max = scheme.max_magnitude();
    for (index, b) in bounds.iter().enumerate() {
        if b.lo().as_f64().abs() > max || b.hi().as_f64().abs() > max {
            return Err(EncodeError::UnrepresentableBounds { index });
        }
    }
    let values: Vec<R> = bounds.iter().map(|b| b.sample(rng)).collect();
    encode(&values, scheme)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scheme_3_1() -> EncodingScheme {
        EncodingScheme::new(3, 1, 1, vec![0..1]).unwrap()
    }

    #[test]
    fn decode_sign_and_decimal_rules() {
        let s = scheme_3_1();
        let c = Chromosome::from_digits(vec![2, 1, 5, 0], &s).unwrap();
        assert_eq!(decode::<f64>(&c, &s), vec![1.50]);
        let c = Chromosome::from_digits(vec![7, 1, 5, 0], &s).unwrap();
        assert_eq!(decode::<f64>(&c, &s), vec![-1.50]);
        let c = Chromosome::from_digits(vec![0, 0, 0, 0], &s).unwrap();
        assert_eq!(decode::<f64>(&c, &s), vec![0.0]);
    }

    #[test]
    fn encode_uses_canonical_sign_digits() {
        let s = scheme_3_1();
        assert_eq!(encode(&[1.50f64], &s).unwrap().digits(), &[0, 1, 5, 0]);
        let c = encode(&[-0.25f64], &s).unwrap();
        assert_eq!(c.digits(), &[5, 0, 2, 5]);
        assert_eq!(decode::<f64>(&c, &s), vec![-0.25]);
    }

    #[test]
    fn encode_overflow_names_the_variable() {
        let s = scheme_3_1();
        match encode(&[99.9f64], &s) {
            Err(EncodeError::OutOfRange { index: 0, max, .. }) => {
                assert!((max - 9.99).abs() < 1e-12);
            }
            other => panic!("expected OutOfRange, got {other:?}"),
        }
    }

    #[test]
    fn rounding_is_half_away_from_zero() {
        let s = scheme_3_1();
        // step 0.01; 0.015 rounds up to 0.02, -0.015 rounds down to -0.02
        assert_eq!(decode::<f64>(&encode(&[0.015f64], &s).unwrap(), &s), vec![0.02]);
        assert_eq!(decode::<f64>(&encode(&[-0.015f64], &s).unwrap(), &s), vec![-0.02]);
    }

    #[test]
    fn degenerate_bounds_sample_to_zero() {
        let s = EncodingScheme::new(3, 1, 2, vec![0..1, 1..2]).unwrap();
        let bounds = [Interval::new(0.0f64, 0.0).unwrap(); 2];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = random_chromosome(&s, &bounds, &mut rng).unwrap();
        assert_eq!(decode::<f64>(&c, &s), vec![0.0, 0.0]);
    }

    #[test]
    fn sampling_is_uniform_in_the_mean() {
        let s = scheme_3_1();
        let bounds = [Interval::new(-1.0f64, 1.0).unwrap()];
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut sum = 0.0;
        for _ in 0..10_000 {
            let c = random_chromosome(&s, &bounds, &mut rng).unwrap();
            sum += decode::<f64>(&c, &s)[0];
        }
        let mean = sum / 10_000.0;
        assert!(mean.abs() < 0.05, "empirical mean {mean} not within +/-0.05 of 0");
    }

    #[test]
    fn same_seed_reproduces_chromosomes() {
        let s = EncodingScheme::new(4, 1, 3, vec![0..2, 2..3]).unwrap();
        let bounds = [Interval::new(-2.0f64, 2.0).unwrap(); 3];
        let a = random_chromosome(&s, &bounds, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = random_chromosome(&s, &bounds, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn slices_must_partition() {
        assert!(EncodingScheme::new(3, 1, 4, vec![0..2, 3..4]).is_err());
        assert!(EncodingScheme::new(3, 1, 4, vec![0..2, 1..4]).is_err());
        assert!(EncodingScheme::new(3, 1, 4, vec![0..2, 2..4]).is_ok());
    }

    #[test]
    fn decimal_position_extremes() {
        // decimal_position = 0: pure fractions; = magnitude_digits: integers
        let frac = EncodingScheme::new(3, 0, 1, vec![0..1]).unwrap();
        let c = Chromosome::from_digits(vec![0, 1, 2, 5], &frac).unwrap();
        assert_eq!(decode::<f64>(&c, &frac), vec![0.125]);
        let int = EncodingScheme::new(3, 3, 1, vec![0..1]).unwrap();
        let c = Chromosome::from_digits(vec![0, 1, 2, 5], &int).unwrap();
        assert_eq!(decode::<f64>(&c, &int), vec![125.0]);
    }
}
