//! Line protocol between the controller and the lamp service, plus the
//! in-memory lamp simulator the TCP server wraps.
//!
//! Wire format, one ASCII line per message:
//!
//! ```text
//! SET <zone> <R> <G> <B> <I>\n     -> OK\n | ERR range\n
//! OFF <zone>\n                     -> OK\n
//! GET <zone>\n                     -> STATE <zone> <R> <G> <B> <I>\n
//!                                   | STATE <zone> OFF\n
//! anything else                    -> ERR parse\n
//! ```
//!
//! Channels are 0-255, intensity 0-100 percent, zone names are single
//! tokens with no whitespace.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("invalid zone name '{0}'")]
    InvalidZoneName(String),
    #[error("parse error at {0}")]
    Parse(&'static str),
    #[error("value out of range for {0}")]
    Range(&'static str),
}

/// A zone-addressed lighting command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LightingCommand {
    Set {
        zone: String,
        red: u8,
        green: u8,
        blue: u8,
        intensity: u8,
    },
    Off {
        zone: String,
    },
}

fn check_zone(zone: &str) -> Result<(), ProtocolError> {
    let ok = !zone.is_empty() && zone.bytes().all(|b| b.is_ascii_graphic());
    if ok {
        Ok(())
    } else {
        Err(ProtocolError::InvalidZoneName(zone.to_string()))
    }
}

impl LightingCommand {
    pub fn set(
        zone: &str,
        red: u8,
        green: u8,
        blue: u8,
        intensity: u8,
    ) -> Result<Self, ProtocolError> {
        check_zone(zone)?;
        if intensity > 100 {
            return Err(ProtocolError::Range("intensity"));
        }
        Ok(LightingCommand::Set {
            zone: zone.to_string(),
            red,
            green,
            blue,
            intensity,
        })
    }

    pub fn off(zone: &str) -> Result<Self, ProtocolError> {
        check_zone(zone)?;
        Ok(LightingCommand::Off {
            zone: zone.to_string(),
        })
    }

    pub fn zone(&self) -> &str {
        match self {
            LightingCommand::Set { zone, .. } | LightingCommand::Off { zone } => zone,
        }
    }

    /// Exact wire line, including the trailing newline.
    pub fn encode(&self) -> String {
        match self {
            LightingCommand::Set {
                zone,
                red,
                green,
                blue,
                intensity,
            } => format!("SET {zone} {red} {green} {blue} {intensity}\n"),
            LightingCommand::Off { zone } => format!("OFF {zone}\n"),
        }
    }
}

fn field(value: Option<&str>, name: &'static str, max: u32) -> Result<u8, ProtocolError> {
    let text = value.ok_or(ProtocolError::Parse(name))?;
    if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) || text.len() > 3 {
        return Err(ProtocolError::Parse(name));
    }
    let v: u32 = text.parse().map_err(|_| ProtocolError::Parse(name))?;
    if v > max {
        return Err(ProtocolError::Range(name));
    }
    Ok(v as u8)
}

/// Decode one command line (trailing newline optional); exact inverse
/// of [`LightingCommand::encode`].
pub fn decode(line: &str) -> Result<LightingCommand, ProtocolError> {
    let line = line.strip_suffix('\n').unwrap_or(line);
    let mut parts = line.split(' ');
    let verb = parts.next().ok_or(ProtocolError::Parse("verb"))?;
    match verb {
        "SET" => {
            let zone = parts.next().ok_or(ProtocolError::Parse("zone"))?;
            check_zone(zone)?;
            let red = field(parts.next(), "red", 255)?;
            let green = field(parts.next(), "green", 255)?;
            let blue = field(parts.next(), "blue", 255)?;
            let intensity = field(parts.next(), "intensity", 100)?;
            if parts.next().is_some() {
                return Err(ProtocolError::Parse("trailing"));
            }
            Ok(LightingCommand::Set {
                zone: zone.to_string(),
                red,
                green,
                blue,
                intensity,
            })
        }
        "OFF" => {
            let zone = parts.next().ok_or(ProtocolError::Parse("zone"))?;
            check_zone(zone)?;
            if parts.next().is_some() {
                return Err(ProtocolError::Parse("trailing"));
            }
            Ok(LightingCommand::Off {
                zone: zone.to_string(),
            })
        }
        _ => Err(ProtocolError::Parse("verb")),
    }
}

/// Last applied values per zone; `None` means off (or never set).
pub type ZoneState = Option<(u8, u8, u8, u8)>;

/// The lamp controller's state machine, wire-level but transport-free.
#[derive(Debug, Default)]
pub struct LampSim {
    states: BTreeMap<String, (ZoneState, u64)>,
    history: Vec<LightingCommand>,
    seq: u64,
}

impl LampSim {
    pub fn new() -> Self {
        Self::default()
    }

    /// Apply an already-validated command.
    pub fn apply(&mut self, cmd: LightingCommand) {
        self.seq += 1;
        let entry = match &cmd {
            LightingCommand::Set {
                zone,
                red,
                green,
                blue,
                intensity,
            } => (zone.clone(), Some((*red, *green, *blue, *intensity))),
            LightingCommand::Off { zone } => (zone.clone(), None),
        };
        self.states.insert(entry.0, (entry.1, self.seq));
        self.history.push(cmd);
    }

    pub fn zone_state(&self, zone: &str) -> ZoneState {
        self.states.get(zone).and_then(|(s, _)| *s)
    }

    /// Every acknowledged command, in arrival order.
    pub fn history(&self) -> &[LightingCommand] {
        &self.history
    }

    /// Process one request line and produce the exact reply line.
    pub fn handle_line(&mut self, line: &str) -> String {
        let trimmed = line.strip_suffix('\n').unwrap_or(line);
        if let Some(rest) = trimmed.strip_prefix("GET ") {
            if check_zone(rest).is_err() || rest.contains(' ') {
                return "ERR parse\n".to_string();
            }
            return match self.zone_state(rest) {
                Some((r, g, b, i)) => format!("STATE {rest} {r} {g} {b} {i}\n"),
                None => format!("STATE {rest} OFF\n"),
            };
        }
        match decode(trimmed) {
            Ok(cmd) => {
                self.apply(cmd);
                "OK\n".to_string()
            }
            Err(ProtocolError::Range(_)) => "ERR range\n".to_string(),
            Err(_) => "ERR parse\n".to_string(),
        }
    }
}
