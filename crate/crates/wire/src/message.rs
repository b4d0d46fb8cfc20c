//! The line grammar: encoding and strict decoding.

use crate::WireError;

/// Hard cap on one line including its terminating newline.
pub const MAX_LINE_BYTES: usize = 64 * 1024;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WireMessage {
    /// `HELLO v1 <digest-hex>`
    Hello { digest_hex: String },
    /// `EVAL <x>`
    Eval { x: u64 },
    /// `CLAIM <v>`
    Claim { value: u64 },
    /// `ROUND <exp> <lvl> <v0> ... <v{eta-1}>`
    Round {
        experiment: u64,
        level: u32,
        values: Vec<u64>,
    },
    /// `CHAL <exp> <lvl> <b>`
    Chal {
        experiment: u64,
        level: u32,
        b: u32,
    },
    /// `FINAL <exp> <v>`
    Final { experiment: u64, value: u64 },
    /// `VERDICT <accept|reject> <reason>`
    Verdict { accept: bool, reason: String },
    /// `ERROR <token>`
    Error { reason: String },
}

/// Decimal with no sign and no leading zeros: the only integer syntax on
/// the wire.
fn decimal(tok: &str) -> Result<u64, WireError> {
    if tok.is_empty()
        || (tok.len() > 1 && tok.starts_with('0'))
        || !tok.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(WireError::NonDecimal(clip(tok)));
    }
    tok.parse().map_err(|_| WireError::NonDecimal(clip(tok)))
}

fn clip(tok: &str) -> String {
    tok.chars().take(32).collect()
}

impl WireMessage {
    pub fn encode(&self) -> Result<String, WireError> {
        let line = match self {
            WireMessage::Hello { digest_hex } => format!("HELLO v1 {digest_hex}"),
            WireMessage::Eval { x } => format!("EVAL {x}"),
            WireMessage::Claim { value } => format!("CLAIM {value}"),
            WireMessage::Round {
                experiment,
                level,
                values,
            } => {
                let mut line = format!("ROUND {experiment} {level}");
                for v in values {
                    line.push(' ');
                    line.push_str(&v.to_string());
                }
                line
            }
            WireMessage::Chal {
                experiment,
                level,
                b,
            } => format!("CHAL {experiment} {level} {b}"),
            WireMessage::Final { experiment, value } => format!("FINAL {experiment} {value}"),
            WireMessage::Verdict { accept, reason } => {
                let word = if *accept { "accept" } else { "reject" };
                format!("VERDICT {word} {reason}")
            }
            WireMessage::Error { reason } => format!("ERROR {reason}"),
        };
        if line.len() + 1 > MAX_LINE_BYTES {
            return Err(WireError::Oversize);
        }
        Ok(line)
    }

    /// Strict decode of one line (without its newline). Unknown verbs,
    /// wrong arities and malformed integers are errors, never skipped.
    pub fn decode(line: &str) -> Result<WireMessage, WireError> {
        let mut toks = line.split(' ');
        let verb = toks.next().unwrap_or("");
        let rest: Vec<&str> = toks.collect();
        match verb {
            "HELLO" => {
                if rest.len() != 2 {
                    return Err(WireError::WrongArity("HELLO"));
                }
                if rest[0] != "v1" {
                    return Err(WireError::Version(clip(rest[0])));
                }
                let digest = rest[1];
                let ok = digest.len() == 64
                    && digest.bytes().all(|b| b.is_ascii_hexdigit() && !b.is_ascii_uppercase());
                if !ok {
                    return Err(WireError::BadDigest(clip(digest)));
                }
                Ok(WireMessage::Hello {
                    digest_hex: digest.to_string(),
                })
            }
            "EVAL" => match rest.as_slice() {
                [x] => Ok(WireMessage::Eval { x: decimal(x)? }),
                _ => Err(WireError::WrongArity("EVAL")),
            },
            "CLAIM" => match rest.as_slice() {
                [v] => Ok(WireMessage::Claim { value: decimal(v)? }),
                _ => Err(WireError::WrongArity("CLAIM")),
            },
            "ROUND" => {
                if rest.len() < 3 {
                    return Err(WireError::WrongArity("ROUND"));
                }
                let experiment = decimal(rest[0])?;
                let level = as_u32(rest[1])?;
                let values = rest[2..]
                    .iter()
                    .map(|t| decimal(t))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(WireMessage::Round {
                    experiment,
                    level,
                    values,
                })
            }
            "CHAL" => match rest.as_slice() {
                [e, l, b] => Ok(WireMessage::Chal {
                    experiment: decimal(e)?,
                    level: as_u32(l)?,
                    b: as_u32(b)?,
                }),
                _ => Err(WireError::WrongArity("CHAL")),
            },
            "FINAL" => match rest.as_slice() {
                [e, v] => Ok(WireMessage::Final {
                    experiment: decimal(e)?,
                    value: decimal(v)?,
                }),
                _ => Err(WireError::WrongArity("FINAL")),
            },
            "VERDICT" => match rest.as_slice() {
                [word, reason] => {
                    let accept = match *word {
                        "accept" => true,
                        "reject" => false,
                        _ => return Err(WireError::Unexpected(clip(word))),
                    };
                    Ok(WireMessage::Verdict {
                        accept,
                        reason: reason.to_string(),
                    })
                }
                _ => Err(WireError::WrongArity("VERDICT")),
            },
            "ERROR" => {
                if rest.is_empty() {
                    return Err(WireError::WrongArity("ERROR"));
                }
                Ok(WireMessage::Error {
                    reason: rest.join(" "),
                })
            }
            other => Err(WireError::UnknownVerb(clip(other))),
        }
    }
}

fn as_u32(tok: &str) -> Result<u32, WireError> {
    u32::try_from(decimal(tok)?).map_err(|_| WireError::NonDecimal(clip(tok)))
}
