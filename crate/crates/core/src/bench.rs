//! Benchmark circuit generators with known deterministic outputs.
//!
//! Bit strings follow the readout convention: the rightmost character is
//! clbit 0, which is also qubit 0 of the operand register.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, Gate};
use crate::sim::Counts;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchError {
    #[error("{family}: {msg}")]
    BadParameter { family: Family, msg: String },
    #[error("unknown benchmark `{0}`")]
    UnknownBenchmark(String),
    #[error("expected string has {expected} bits but counts have {counts}")]
    WidthMismatch { expected: usize, counts: usize },
    #[error("counts are empty")]
    ZeroShots,
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    Bv,
    HiddenShift,
    Qft,
    Toffoli,
    Adder,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::Bv, Family::HiddenShift, Family::Qft, Family::Toffoli, Family::Adder];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Bv => "bv",
            Family::HiddenShift => "hs",
            Family::Qft => "qft",
            Family::Toffoli => "toffoli",
            Family::Adder => "adder",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = BenchError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| BenchError::UnknownBenchmark(s.to_string()))
    }
}

/// A generated circuit and the single bitstring it outputs when noiseless.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkInstance {
    pub family: Family,
    pub n: usize,
    /// Family parameter (secret, shift, value, input or operands) as text.
    pub param: String,
    pub circuit: Circuit,
    pub expected: String,
    pub n_readouts: usize,
}

impl BenchmarkInstance {
    /// Short label such as `hs(4)`.
    pub fn label(&self) -> String {
        format!("{}({})", self.family, self.n)
    }
}

fn bad(family: Family, msg: impl Into<String>) -> BenchError {
    BenchError::BadParameter { family, msg: msg.into() }
}

/// Parses an `n`-character bit string into bits indexed from the right.
fn bits_of(family: Family, s: &str, n: usize) -> Result<Vec<bool>, BenchError> {
    if s.len() != n || !s.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(bad(family, format!("`{s}` is not a {n}-bit string")));
    }
    Ok(s.bytes().rev().map(|b| b == b'1').collect())
}

fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().rev().map(|&b| if b { '1' } else { '0' }).collect()
}

fn binary(value: u64, width: usize) -> String {
    (0..width).rev().map(|i| if (value >> i) & 1 == 1 { '1' } else { '0' }).collect()
}

fn finish(
    family: Family,
    n: usize,
    param: String,
    mut circuit: Circuit,
    expected: String,
) -> Result<BenchmarkInstance, BenchError> {
    circuit.set_name(format!("{family}({n})"));
    let n_readouts = circuit.measurements().len();
    Ok(BenchmarkInstance { family, n, param, circuit, expected, n_readouts })
}

/// Bernstein-Vazirani over `n` data qubits plus one ancilla (qubit `n`,
/// clbit `n`). The ancilla is prepared in |−⟩ and rotated back with a
/// final H only, so it reads 1: `expected = "1" ++ secret`.
pub fn bv(n: usize, secret: &str) -> Result<BenchmarkInstance, BenchError> {
    if n == 0 {
        return Err(bad(Family::Bv, "n must be at least 1"));
    }
    let s = bits_of(Family::Bv, secret, n)?;
    let anc = n;
    let mut c = Circuit::new(n + 1, n + 1);
    c.extend([Gate::X(anc), Gate::H(anc)])?;
    c.extend((0..n).map(Gate::H))?;
    c.extend((0..n).filter(|&i| s[i]).map(|i| Gate::cx(i, anc)))?;
    c.extend((0..n).map(Gate::H))?;
    c.push(Gate::H(anc))?;
    c.extend((0..=n).map(|q| Gate::measure(q, q)))?;
    finish(Family::Bv, n, secret.to_string(), c, format!("1{secret}"))
}

/// Hidden shift for the inner-product bent function on qubit pairs
/// `(2i, 2i+1)`; outputs the shift.
pub fn hidden_shift(n: usize, shift: &str) -> Result<BenchmarkInstance, BenchError> {
    if n < 2 || n % 2 != 0 {
        return Err(bad(Family::HiddenShift, format!("n must be even and at least 2, got {n}")));
    }
    let s = bits_of(Family::HiddenShift, shift, n)?;
    let pairs = || (0..n / 2).map(|i| Gate::Cz(2 * i, 2 * i + 1));
    let flips = || (0..n).filter(|&q| s[q]).map(Gate::X);
    let mut c = Circuit::new(n, n);
    c.extend((0..n).map(Gate::H))?;
    c.extend(flips())?;
    c.extend(pairs())?;
    c.extend(flips())?;
    c.extend((0..n).map(Gate::H))?;
    c.extend(pairs())?;
    c.extend((0..n).map(Gate::H))?;
    c.extend((0..n).map(|q| Gate::measure(q, q)))?;
    finish(Family::HiddenShift, n, shift.to_string(), c, shift.to_string())
}

/// Prepares the Fourier encoding of `value` and applies the inverse QFT
/// (no swap network; qubit `j` is read into clbit `n-1-j` instead).
pub fn qft_bench(n: usize, value: u64) -> Result<BenchmarkInstance, BenchError> {
    if n == 0 || n > 63 {
        return Err(bad(Family::Qft, format!("n must be in 1..=63, got {n}")));
    }
    if value >> n != 0 {
        return Err(bad(Family::Qft, format!("value {value} does not fit in {n} bits")));
    }
    let tau = std::f64::consts::TAU;
    let mut c = Circuit::new(n, n);
    for j in 0..n {
        let angle = tau * value as f64 / (1u64 << (n - j)) as f64;
        c.extend([Gate::H(j), Gate::u1(angle, j)])?;
    }
    // Inverse QFT: qubit n-1 carries the least significant bit.
    for j in (0..n).rev() {
        for k in (j + 1..n).rev() {
            let lambda = -std::f64::consts::PI / (1u64 << (k - j)) as f64;
            c.push(Gate::cp(lambda, k, j))?;
        }
        c.push(Gate::H(j))?;
    }
    c.extend((0..n).map(|j| Gate::measure(j, n - 1 - j)))?;
    finish(Family::Qft, n, value.to_string(), c, binary(value, n))
}

/// `n`-controlled NOT. Controls are qubits `0..n` (clbits `1..=n`), the
/// target is qubit `n` (clbit 0), and `n ≥ 3` uses `n − 2` clean ancillas
/// holding partial ANDs, uncomputed after the target flip.
pub fn toffoli_bench(n: usize, input: &str) -> Result<BenchmarkInstance, BenchError> {
    if n < 2 {
        return Err(bad(Family::Toffoli, format!("n must be at least 2, got {n}")));
    }
    let bits = bits_of(Family::Toffoli, input, n)?;
    let target = n;
    let anc = |k: usize| n + 1 + k;
    let mut c = Circuit::new(n + 1 + (n - 2), n + 1);
    c.extend((0..n).filter(|&i| bits[i]).map(Gate::X))?;
    let ladder: Vec<Gate> = (0..n - 2)
        .map(|k| {
            let prev = if k == 0 { 0 } else { anc(k - 1) };
            Gate::Ccx { c0: prev, c1: k + 1, target: anc(k) }
        })
        .collect();
    c.extend(ladder.iter().copied())?;
    let last = if n == 2 { 0 } else { anc(n - 3) };
    c.push(Gate::Ccx { c0: last, c1: n - 1, target })?;
    c.extend(ladder.iter().rev().copied())?;
    c.push(Gate::measure(target, 0))?;
    c.extend((0..n).map(|i| Gate::measure(i, i + 1)))?;
    let and = bits.iter().all(|&b| b);
    finish(Family::Toffoli, n, input.to_string(), c, format!("{input}{}", u8::from(and)))
}

/// Cuccaro ripple-carry adder computing `a + b` into the `b` register.
///
/// Qubits: carry-in 0, `b_i` at `1 + 2i`, `a_i` at `2 + 2i`, carry-out
/// `2n + 1`. Sum bit `i` is read into clbit `i`, carry-out into clbit `n`.
pub fn adder_bench(n: usize, a: u64, b: u64) -> Result<BenchmarkInstance, BenchError> {
    if n == 0 || n > 31 {
        return Err(bad(Family::Adder, format!("n must be in 1..=31, got {n}")));
    }
    if a >> n != 0 || b >> n != 0 {
        return Err(bad(Family::Adder, format!("operands {a}, {b} do not fit in {n} bits")));
    }
    let cin = 0;
    let bq = |i: usize| 1 + 2 * i;
    let aq = |i: usize| 2 + 2 * i;
    let cout = 2 * n + 1;
    let maj = |x: usize, y: usize, z: usize| [Gate::cx(z, y), Gate::cx(z, x), Gate::Ccx { c0: x, c1: y, target: z }];
    let uma = |x: usize, y: usize, z: usize| [Gate::Ccx { c0: x, c1: y, target: z }, Gate::cx(z, x), Gate::cx(x, y)];
    let carry = |i: usize| if i == 0 { cin } else { aq(i - 1) };

    let mut c = Circuit::new(2 * n + 2, n + 1);
    c.extend((0..n).filter(|&i| (a >> i) & 1 == 1).map(|i| Gate::X(aq(i))))?;
    c.extend((0..n).filter(|&i| (b >> i) & 1 == 1).map(|i| Gate::X(bq(i))))?;
    for i in 0..n {
        c.extend(maj(carry(i), bq(i), aq(i)))?;
    }
    c.push(Gate::cx(aq(n - 1), cout))?;
    for i in (0..n).rev() {
        c.extend(uma(carry(i), bq(i), aq(i)))?;
    }
    c.extend((0..n).map(|i| Gate::measure(bq(i), i)))?;
    c.push(Gate::measure(cout, n))?;
    finish(Family::Adder, n, format!("{}+{}", binary(a, n), binary(b, n)), c, binary(a + b, n + 1))
}

/// Fraction of shots that produced `expected`.
pub fn accuracy(counts: &Counts, expected: &str) -> Result<f64, BenchError> {
    if expected.len() != counts.width() {
        return Err(BenchError::WidthMismatch { expected: expected.len(), counts: counts.width() });
    }
    if counts.shots() == 0 {
        return Err(BenchError::ZeroShots);
    }
    Ok(counts.get(expected) as f64 / counts.shots() as f64)
}

/// A family and size whose parameter is drawn from a seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchSpec {
    pub family: Family,
    pub n: usize,
}

impl BenchSpec {
    pub fn new(family: Family, n: usize) -> Self {
        BenchSpec { family, n }
    }

    /// Instance with a parameter drawn from `rng`.
    pub fn instantiate(&self, rng: &mut impl Rng) -> Result<BenchmarkInstance, BenchError> {
        let n = self.n;
        let random_bits = |rng: &mut dyn rand::RngCore| -> String {
            let bits: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
            bits_to_string(&bits)
        };
        match self.family {
            Family::Bv => bv(n, &random_bits(rng)),
            Family::HiddenShift => hidden_shift(n, &random_bits(rng)),
            Family::Qft => {
                let v = if n >= 64 { 0 } else { rng.random_range(0..1u64 << n) };
                qft_bench(n, v)
            }
            Family::Toffoli => toffoli_bench(n, &random_bits(rng)),
            Family::Adder => {
                let hi = if n >= 32 { 1 } else { 1u64 << n };
                let (a, b) = (rng.random_range(0..hi), rng.random_range(0..hi));
                adder_bench(n, a, b)
            }
        }
    }

    /// Instance with an explicit parameter in the form recorded in
    /// [`BenchmarkInstance::param`]: a bit string for bv, hs and toffoli, a
    /// decimal value for qft, and `a+b` bit strings for the adder.
    pub fn with_param(&self, param: &str) -> Result<BenchmarkInstance, BenchError> {
        let n = self.n;
        let family = self.family;
        match family {
            Family::Bv => bv(n, param),
            Family::HiddenShift => hidden_shift(n, param),
            Family::Toffoli => toffoli_bench(n, param),
            Family::Qft => qft_bench(n, param.trim().parse().map_err(|_| bad(family, format!("bad value `{param}`")))?),
            Family::Adder => {
                let operand = |s: &str| -> Result<u64, BenchError> {
                    let bits = bits_of(family, s.trim(), n)?;
                    Ok(bits.iter().enumerate().map(|(i, &b)| u64::from(b) << i).sum())
                };
                let (a, b) = param.split_once('+').ok_or_else(|| bad(family, format!("expected `a+b`, got `{param}`")))?;
                adder_bench(n, operand(a)?, operand(b)?)
            }
        }
    }

    /// Instance with the parameter drawn from `seed`.
    pub fn instantiate_seeded(&self, seed: u64) -> Result<BenchmarkInstance, BenchError> {
        self.instantiate(&mut ChaCha8Rng::seed_from_u64(seed))
    }
}

impl fmt::Display for BenchSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.family, self.n)
    }
}

impl FromStr for BenchSpec {
    type Err = BenchError;
    /// Parses `family(n)`, e.g. `hs(6)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let unknown = || BenchError::UnknownBenchmark(s.to_string());
        let (name, rest) = s.split_once('(').ok_or_else(unknown)?;
        let n = rest.strip_suffix(')').and_then(|v| v.trim().parse().ok()).ok_or_else(unknown)?;
        Ok(BenchSpec::new(name.trim().parse()?, n))
    }
}

/// Parses a comma-separated suite such as `bv(4),hs(6)`.
pub fn parse_suite(s: &str) -> Result<Vec<BenchSpec>, BenchError> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect()
}

/// Sizes of the default job: three per family.
pub const DEFAULT_SIZES: [(Family, [usize; 3]); 5] = [
    (Family::Bv, [4, 6, 8]),
    (Family::HiddenShift, [4, 6, 8]),
    (Family::Qft, [4, 6, 8]),
    (Family::Toffoli, [2, 3, 4]),
    (Family::Adder, [2, 3, 4]),
];
/// Repetitions of every (family, size) in the default job.
pub const DEFAULT_REPETITIONS: usize = 5;

/// The default benchmark job: every family at three sizes, five seeded
/// instances each (75 circuits).
pub fn default_suite(seed: u64) -> Result<Vec<BenchmarkInstance>, BenchError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(75);
    for (family, sizes) in DEFAULT_SIZES {
        for n in sizes {
            for _ in 0..DEFAULT_REPETITIONS {
                out.push(BenchSpec::new(family, n).instantiate(&mut rng)?);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::decompose_to_basis;
    use crate::sim::run_noiseless;

    fn assert_deterministic(b: &BenchmarkInstance) {
        let dist = run_noiseless(&decompose_to_basis(&b.circuit).unwrap()).unwrap();
        let p = dist.get(&b.expected).copied().unwrap_or(0.0);
        assert!((p - 1.0).abs() < 1e-9, "{} {}: {dist:?}", b.label(), b.expected);
    }

    #[test]
    fn small_instances_are_deterministic() {
        assert_deterministic(&bv(1, "0").unwrap());
        assert_deterministic(&bv(4, "1011").unwrap());
        assert_deterministic(&hidden_shift(4, "0110").unwrap());
        assert_deterministic(&qft_bench(3, 5).unwrap());
        assert_deterministic(&toffoli_bench(2, "11").unwrap());
        assert_deterministic(&adder_bench(2, 3, 1).unwrap());
    }

    #[test]
    fn spec_strings_parse() {
        assert_eq!("hs(6)".parse::<BenchSpec>().unwrap(), BenchSpec::new(Family::HiddenShift, 6));
        assert!("foo(3)".parse::<BenchSpec>().is_err());
        assert_eq!(parse_suite("bv(4), qft(4)").unwrap().len(), 2);
    }
}
