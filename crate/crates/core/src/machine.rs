//! The fixed reference machine and its program enumerator.
//!
//! Every bitstring is a program. Execution reads the program left to right:
//!
//! ```text
//! P := ε                   halt with empty output
//!    | 1 R                 LITERAL         emit R and halt
//!    | 0 0     γ(j) P'     REPEAT(j)        run P', emit its output j+1 times in total
//!    | 0 10    R           SPLICE           emit w[..|w|-|R|] ++ R and halt
//!    | 0 110   P'          COPY-COND-ALL    emit w, continue with P'
//!    | 0 1110  γ(k) P'     COPY-COND-PREFIX emit w[..k], continue with P'
//!    | 0 11110 γ(l) b P'   LIT-APPEND       emit the l bits b, continue with P'
//!    | 0 11111 sd(v) P'    SET-COND         replace the condition by v, continue with P'
//! ```
//!
//! `w` is the condition, `γ` is the Elias gamma code of a positive integer and
//! `sd` is the bit-doubling self-delimiting code from [`crate::codec`]. SPLICE
//! with empty `R` copies the whole condition, so `"010"` is the shortest
//! copy-condition program.
//!
//! Cost model: one step per decoded instruction (the LITERAL mode bit counts as
//! one) plus one step per emitted bit. Reading past the end of the condition or
//! a truncated operand makes the run `Invalid`.

use std::borrow::Cow;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bits::Bitstring;
use crate::codec::decode_self_delim_prefix;

/// Canonical description hashed into the machine version id. Any change to the
/// instruction set must change this text.
const ISA_DESCRIPTOR: &str = "aitlab-isa v2; \
    eps=halt; 1R=literal; 00 gamma(j) P=repeat j+1; 010R=splice(w,R); \
    0110 P=copy-cond-all; 01110 gamma(k) P=copy-cond-prefix(k); \
    011110 gamma(l) b^l P=literal-append; 011111 sd(v) P=set-cond(v); \
    gamma=elias-gamma; sd=doubled+01; steps=1/instruction+1/emitted-bit; \
    cond-overrun=invalid; truncated-operand=invalid";

/// Bits added by literal mode: `C(x|w) ≤ |x| + C_LITERAL`.
pub const C_LITERAL: u32 = 1;
/// Extra steps a literal program needs beyond `|x|`.
pub const C_OVERHEAD: u64 = 1;
/// Length of the shortest program that outputs its whole condition (`"010"`).
pub const C_CONDCOPY: u32 = 3;
/// Opcode bits in front of `sd(v)` for SET-COND (`"011111"`).
pub const C_SETCOND: u32 = 6;

/// Identity and constants of the reference machine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MachineSpec {
    pub version_id: String,
    pub c_literal: u32,
    pub c_condcopy: u32,
    pub c_overhead: u64,
}

impl MachineSpec {
    pub fn current() -> &'static MachineSpec {
        static SPEC: OnceLock<MachineSpec> = OnceLock::new();
        SPEC.get_or_init(|| MachineSpec {
            version_id: version_id().to_string(),
            c_literal: C_LITERAL,
            c_condcopy: C_CONDCOPY,
            c_overhead: C_OVERHEAD,
        })
    }
}

/// 16 hex characters identifying the instruction set.
pub fn version_id() -> &'static str {
    static ID: OnceLock<String> = OnceLock::new();
    ID.get_or_init(|| {
        let digest = Sha256::digest(ISA_DESCRIPTOR.as_bytes());
        hex::encode(digest)[..16].to_string()
    })
}

/// A program for the reference machine.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Program(pub Bitstring);

impl Program {
    pub fn new(code: Bitstring) -> Self {
        Self(code)
    }

    pub fn code(&self) -> &Bitstring {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The program at position `index` of the length-lexicographic enumeration.
    pub fn from_index(index: u64) -> Self {
        let (len, offset) = index_split(index);
        Self(Bitstring::from_value(offset, len))
    }

    /// Position of this program in the length-lexicographic enumeration.
    pub fn index(&self) -> u64 {
        (1u64 << self.len()) - 1 + self.0.value()
    }

    /// The literal-mode program `"1" + x`.
    pub fn literal(x: &Bitstring) -> Self {
        let mut bits = Vec::with_capacity(x.len() + 1);
        bits.push(true);
        bits.extend_from_slice(x.bits());
        Self(Bitstring::from_bits(bits))
    }
}

fn index_split(index: u64) -> (usize, u64) {
    let len = 63 - (index + 1).leading_zeros() as usize;
    (len, index + 1 - (1u64 << len))
}

/// Number of programs of length at most `max_len`: `2^(max_len+1) - 1`.
pub fn program_count(max_len: usize) -> u64 {
    (1u64 << (max_len + 1)) - 1
}

/// All programs of length `0..=max_len` in length-lexicographic order.
pub fn enumerate_programs(max_len: usize) -> impl Iterator<Item = Program> {
    (0..program_count(max_len)).map(Program::from_index)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunKind {
    Halted(Bitstring),
    OutOfBudget,
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub kind: RunKind,
    pub steps_used: u64,
}

impl RunOutcome {
    pub fn output(&self) -> Option<&Bitstring> {
        match &self.kind {
            RunKind::Halted(o) => Some(o),
            _ => None,
        }
    }
}

/// Runs `p` on condition `w` with at most `budget` steps.
pub fn run(p: &Program, w: &Bitstring, budget: u64) -> RunOutcome {
    let mut exec = Exec::new(p.0.bits(), w.bits(), budget, usize::MAX);
    let kind = match exec.execute() {
        Ok(()) => RunKind::Halted(Bitstring::from_bits(std::mem::take(&mut exec.out))),
        Err(Stop::Budget) => RunKind::OutOfBudget,
        Err(Stop::Invalid) => RunKind::Invalid,
        Err(Stop::Overflow) => unreachable!("no output limit in run()"),
    };
    RunOutcome {
        kind,
        steps_used: exec.steps,
    }
}

/// Runs `prog` and returns its output only if it halts with exactly
/// `want_len` bits. Aborts early once the output grows past `want_len`, which
/// never changes the answer because output only grows.
pub(crate) fn run_for_length(
    prog: &[bool],
    cond: &[bool],
    budget: u64,
    want_len: usize,
) -> Option<Vec<bool>> {
    let mut exec = Exec::new(prog, cond, budget, want_len);
    match exec.execute() {
        Ok(()) if exec.out.len() == want_len => Some(exec.out),
        _ => None,
    }
}

/// True when the program may read the condition it was started with. Programs
/// for which this is false behave identically under every condition.
pub fn reads_condition(p: &Program) -> bool {
    let bits = p.0.bits();
    let mut pos = 0;
    loop {
        let Some(&mode) = bits.get(pos) else {
            return false;
        };
        pos += 1;
        if mode {
            return false;
        }
        let opcode: Vec<bool> = bits[pos..].iter().take(4).copied().collect();
        match opcode.as_slice() {
            [false, ..] => {
                pos += 1;
                match read_gamma(bits, &mut pos) {
                    Some(_) => continue,
                    None => return false,
                }
            }
            [true, false, ..] | [true, true, false, ..] => return true,
            [true, true, true, false] => {
                pos += 4;
                // the prefix length is decoded before the condition is touched
                return read_gamma(bits, &mut pos).is_some();
            }
            [true, true, true, true] if bits.get(pos + 4) == Some(&false) => {
                pos += 5;
                match read_gamma(bits, &mut pos) {
                    Some(l) if (l as usize) <= bits.len() - pos => pos += l as usize,
                    _ => return false,
                }
            }
            // SET-COND (or a truncated opcode) never observes the original condition
            _ => return false,
        }
    }
}

fn read_gamma(bits: &[bool], pos: &mut usize) -> Option<u64> {
    let mut zeros = 0usize;
    loop {
        match bits.get(*pos) {
            Some(false) => {
                zeros += 1;
                *pos += 1;
            }
            Some(true) => break,
            None => return None,
        }
    }
    if zeros > 62 || *pos + zeros + 1 > bits.len() {
        return None;
    }
    let v = bits[*pos..*pos + zeros + 1]
        .iter()
        .fold(0u64, |acc, &b| (acc << 1) | b as u64);
    *pos += zeros + 1;
    Some(v)
}

/// Elias gamma code of `v ≥ 1`.
pub fn gamma(v: u64) -> Bitstring {
    assert!(v >= 1, "gamma code needs a positive integer");
    let body = Bitstring::bin(v);
    let mut bits = vec![false; body.len() - 1];
    bits.extend_from_slice(body.bits());
    Bitstring::from_bits(bits)
}

enum Stop {
    Budget,
    Invalid,
    Overflow,
}

struct Exec<'a> {
    prog: &'a [bool],
    pos: usize,
    cond: Cow<'a, [bool]>,
    budget: u64,
    steps: u64,
    out: Vec<bool>,
    out_limit: usize,
}

impl<'a> Exec<'a> {
    fn new(prog: &'a [bool], cond: &'a [bool], budget: u64, out_limit: usize) -> Self {
        Self {
            prog,
            pos: 0,
            cond: Cow::Borrowed(cond),
            budget,
            steps: 0,
            out: Vec::new(),
            out_limit,
        }
    }

    fn charge(&mut self, k: u64) -> Result<(), Stop> {
        match self.steps.checked_add(k) {
            Some(s) if s <= self.budget => {
                self.steps = s;
                Ok(())
            }
            _ => {
                self.steps = self.budget;
                Err(Stop::Budget)
            }
        }
    }

    fn reserve_output(&mut self, k: u64) -> Result<(), Stop> {
        if (self.out.len() as u64).saturating_add(k) > self.out_limit as u64 {
            return Err(Stop::Overflow);
        }
        self.charge(k)
    }

    fn bit(&mut self) -> Result<bool, Stop> {
        let b = *self.prog.get(self.pos).ok_or(Stop::Invalid)?;
        self.pos += 1;
        Ok(b)
    }

    fn gamma(&mut self) -> Result<u64, Stop> {
        read_gamma(self.prog, &mut self.pos).ok_or(Stop::Invalid)
    }

    fn emit_program_rest(&mut self) -> Result<(), Stop> {
        let rest = &self.prog[self.pos..];
        self.reserve_output(rest.len() as u64)?;
        self.out.extend_from_slice(rest);
        self.pos = self.prog.len();
        Ok(())
    }

    fn emit_cond(&mut self, k: usize) -> Result<(), Stop> {
        if k > self.cond.len() {
            return Err(Stop::Invalid);
        }
        self.reserve_output(k as u64)?;
        self.out.extend_from_slice(&self.cond[..k]);
        Ok(())
    }

    fn execute(&mut self) -> Result<(), Stop> {
        let mut repeats: Vec<(usize, u64)> = Vec::new();
        while self.pos < self.prog.len() {
            self.charge(1)?;
            if self.bit()? {
                self.emit_program_rest()?;
                break;
            }
            if !self.bit()? {
                let j = self.gamma()?;
                repeats.push((self.out.len(), j));
                continue;
            }
            if !self.bit()? {
                // SPLICE
                let keep = self
                    .cond
                    .len()
                    .checked_sub(self.prog.len() - self.pos)
                    .ok_or(Stop::Invalid)?;
                self.emit_cond(keep)?;
                self.emit_program_rest()?;
                break;
            }
            if !self.bit()? {
                self.emit_cond(self.cond.len())?;
                continue;
            }
            if !self.bit()? {
                let k = self.gamma()?;
                let k = usize::try_from(k).map_err(|_| Stop::Invalid)?;
                self.emit_cond(k)?;
            } else if !self.bit()? {
                let l = self.gamma()? as usize;
                if l > self.prog.len() - self.pos {
                    return Err(Stop::Invalid);
                }
                self.reserve_output(l as u64)?;
                self.out
                    .extend_from_slice(&self.prog[self.pos..self.pos + l]);
                self.pos += l;
            } else {
                let (v, used) =
                    decode_self_delim_prefix(&self.prog[self.pos..]).map_err(|_| Stop::Invalid)?;
                self.pos += used;
                self.cond = Cow::Owned(v.into_bits());
            }
        }
        for (start, j) in repeats.into_iter().rev() {
            let seg = self.out.len() - start;
            if seg == 0 {
                continue;
            }
            self.reserve_output((seg as u64).saturating_mul(j))?;
            for _ in 0..j {
                self.out.extend_from_within(start..start + seg);
            }
        }
        Ok(())
    }
}
