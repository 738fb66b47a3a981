//! Self-delimiting encodings: bit doubling terminated by `01`, and the pair
//! format `doubled(bin(|x2|)) 01 x1 x2`.

use crate::bits::Bitstring;
use crate::error::{Error, Result};

/// `doubled(u) + "01"`. Length is `2|u| + 2`.
pub fn encode_self_delim(u: &Bitstring) -> Bitstring {
    let mut bits = Vec::with_capacity(2 * u.len() + 2);
    for &b in u.bits() {
        bits.push(b);
        bits.push(b);
    }
    bits.push(false);
    bits.push(true);
    Bitstring::from_bits(bits)
}

/// Reads one self-delimited payload from the front of `bits`.
///
/// Returns the payload and the number of bits consumed. Trailing bits after
/// the delimiter are left alone.
pub fn decode_self_delim_prefix(bits: &[bool]) -> Result<(Bitstring, usize)> {
    let mut payload = Vec::new();
    let mut pos = 0;
    loop {
        match (bits.get(pos), bits.get(pos + 1)) {
            (Some(&a), Some(&b)) => {
                pos += 2;
                match (a, b) {
                    (false, false) => payload.push(false),
                    (true, true) => payload.push(true),
                    (false, true) => return Ok((Bitstring::from_bits(payload), pos)),
                    (true, false) => {
                        return Err(Error::Decode(format!(
                            "bad pair \"10\" at offset {}",
                            pos - 2
                        )))
                    }
                }
            }
            _ => return Err(Error::Decode("missing \"01\" delimiter".into())),
        }
    }
}

/// Decodes a string that is exactly one self-delimited encoding.
pub fn decode_self_delim(e: &Bitstring) -> Result<Bitstring> {
    let (payload, used) = decode_self_delim_prefix(e.bits())?;
    if used != e.len() {
        return Err(Error::Decode(format!(
            "{} trailing bits after delimiter",
            e.len() - used
        )));
    }
    Ok(payload)
}

/// `doubled(bin(|x2|)) + "01" + x1 + x2`. Empty `x2` is rejected.
pub fn encode_pair(x1: &Bitstring, x2: &Bitstring) -> Result<Bitstring> {
    if x2.is_empty() {
        return Err(Error::Precondition(
            "encode_pair requires a non-empty second component".into(),
        ));
    }
    let header = encode_self_delim(&Bitstring::bin(x2.len() as u64));
    Ok(Bitstring::concat_all([&header, x1, x2]))
}

pub fn decode_pair(e: &Bitstring) -> Result<(Bitstring, Bitstring)> {
    let (len_bits, used) = decode_self_delim_prefix(e.bits())?;
    if len_bits.is_empty() || !len_bits.bits()[0] {
        return Err(Error::Decode(format!(
            "length field {len_bits:?} is not a positive binary numeral"
        )));
    }
    if len_bits.len() > 32 {
        return Err(Error::Decode("length field too wide".into()));
    }
    let len2 = len_bits.value() as usize;
    let body = &e.bits()[used..];
    if body.len() < len2 {
        return Err(Error::Decode(format!(
            "declared |x2| = {len2} but only {} bits follow",
            body.len()
        )));
    }
    let split = body.len() - len2;
    Ok((
        Bitstring::from(&body[..split]),
        Bitstring::from(&body[split..]),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;

    #[test]
    fn self_delim_examples() {
        assert_eq!(encode_self_delim(&bs("101")), bs("11001101"));
        assert_eq!(encode_self_delim(&bs("")), bs("01"));
    }

    #[test]
    fn pair_example() {
        let e = encode_pair(&bs("0110"), &bs("10")).unwrap();
        assert_eq!(e, bs("110001011010"));
        assert_eq!(e.len(), 12);
        assert_eq!(decode_pair(&e).unwrap(), (bs("0110"), bs("10")));
    }

    #[test]
    fn pair_rejects_empty_second() {
        assert!(encode_pair(&bs("01"), &bs("")).is_err());
    }

    #[test]
    fn malformed_pairs() {
        assert!(decode_pair(&bs("01")).is_err());
        assert!(decode_pair(&bs("")).is_err());
        // bad pair "10" inside the header
        assert!(decode_pair(&bs("1001")).is_err());
        // declares |x2| = 2 with one bit of body
        assert!(decode_pair(&bs("1100011")).is_err());
        // leading zero length field
        assert!(decode_pair(&bs("0011010")).is_err());
    }

    #[test]
    fn trailing_bits_rejected() {
        assert!(decode_self_delim(&bs("11010")).is_err());
        assert_eq!(decode_self_delim(&bs("1101")).unwrap(), bs("1"));
    }
}
