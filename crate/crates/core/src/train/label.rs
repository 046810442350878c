use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const NUM_CLASSES: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TrafficClass {
    Video,
    VoIP,
    FileTransfer,
    Chat,
    Browsing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Encryption {
    Unencrypted,
    Tor,
    Vpn,
}

impl TrafficClass {
    pub const ALL: [TrafficClass; 5] = [
        TrafficClass::Video,
        TrafficClass::VoIP,
        TrafficClass::FileTransfer,
        TrafficClass::Chat,
        TrafficClass::Browsing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TrafficClass::Video => "Video",
            TrafficClass::VoIP => "VoIP",
            TrafficClass::FileTransfer => "FileTransfer",
            TrafficClass::Chat => "Chat",
            TrafficClass::Browsing => "Browsing",
        }
    }
}

impl Encryption {
    pub const ALL: [Encryption; 3] = [Encryption::Unencrypted, Encryption::Tor, Encryption::Vpn];

    pub fn name(self) -> &'static str {
        match self {
            Encryption::Unencrypted => "Unencrypted",
            Encryption::Tor => "Tor",
            Encryption::Vpn => "VPN",
        }
    }
}

fn squash(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

impl FromStr for TrafficClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match squash(s).as_str() {
            "video" | "streaming" => Ok(TrafficClass::Video),
            "voip" => Ok(TrafficClass::VoIP),
            "filetransfer" | "ft" | "file" => Ok(TrafficClass::FileTransfer),
            "chat" => Ok(TrafficClass::Chat),
            "browsing" => Ok(TrafficClass::Browsing),
            _ => Err(Error::Config(format!("unknown traffic class `{s}`"))),
        }
    }
}

impl FromStr for Encryption {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match squash(s).as_str() {
            "unencrypted" | "none" | "plain" | "nonvpn" => Ok(Encryption::Unencrypted),
            "tor" => Ok(Encryption::Tor),
            "vpn" => Ok(Encryption::Vpn),
            _ => Err(Error::Config(format!("unknown encryption `{s}`"))),
        }
    }
}

/// One of the 14 (traffic class, encryption) labels.
///
/// Index order walks classes `[Video, VoIP, FileTransfer, Chat, Browsing]`
/// and within each class `[Unencrypted, Tor, VPN]`, skipping Browsing-VPN
/// which has no data. So 2 is Video-VPN and 7 is FileTransfer-Tor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClassLabel(u8);

impl ClassLabel {
    pub fn new(index: usize) -> Result<Self> {
        if index < NUM_CLASSES {
            Ok(ClassLabel(index as u8))
        } else {
            Err(Error::InvalidLabel(index))
        }
    }

    pub fn from_parts(class: TrafficClass, enc: Encryption) -> Result<Self> {
        if class == TrafficClass::Browsing && enc == Encryption::Vpn {
            return Err(Error::Config("Browsing over VPN is not a label".into()));
        }
        Ok(ClassLabel(class as u8 * 3 + enc as u8))
    }

    pub fn all() -> impl Iterator<Item = ClassLabel> {
        (0..NUM_CLASSES as u8).map(ClassLabel)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn traffic_class(self) -> TrafficClass {
        TrafficClass::ALL[self.0 as usize / 3]
    }

    pub fn encryption(self) -> Encryption {
        Encryption::ALL[self.0 as usize % 3]
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.traffic_class().name(), self.encryption().name())
    }
}
