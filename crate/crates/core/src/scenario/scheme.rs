use std::fmt;
use std::str::FromStr;

use crate::constellation::NodeKind;
use crate::error::{Error, Result};
use crate::service::ViewOptions;

/// The five network schemes compared in a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scheme {
    GcnOsg,
    MctnOsg,
    MctnOss,
    MegaCacheXOsg,
    MegaCacheXOss,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::GcnOsg,
        Scheme::MctnOsg,
        Scheme::MctnOss,
        Scheme::MegaCacheXOsg,
        Scheme::MegaCacheXOss,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::GcnOsg => "GCN-OSG",
            Scheme::MctnOsg => "MCTN-OSG",
            Scheme::MctnOss => "MCTN-OSS",
            Scheme::MegaCacheXOsg => "MegaCacheX-OSG",
            Scheme::MegaCacheXOss => "MegaCacheX-OSS",
        }
    }

    /// Origins in space (data-center satellites) or on the ground.
    pub fn space_origin(self) -> bool {
        matches!(self, Scheme::MctnOss | Scheme::MegaCacheXOss)
    }

    pub fn origin_kind(self) -> NodeKind {
        if self.space_origin() {
            NodeKind::SpaceDataCenter
        } else {
            NodeKind::GroundDataCenter
        }
    }

    pub fn ground_only(self) -> bool {
        self == Scheme::GcnOsg
    }

    pub fn caches(self) -> bool {
        matches!(self, Scheme::MegaCacheXOsg | Scheme::MegaCacheXOss)
    }

    pub fn view_options(self) -> ViewOptions {
        ViewOptions {
            ground_only: self.ground_only(),
            origin_kind: self.origin_kind(),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<_> = Scheme::ALL.iter().map(|k| k.name()).collect();
                Error::config("scheme", format!("unknown scheme {s:?}, expected one of {}", names.join(", ")))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for k in Scheme::ALL {
            assert_eq!(k.name().parse::<Scheme>().unwrap(), k);
        }
        assert!("GCN-OSS".parse::<Scheme>().is_err());
    }

    #[test]
    fn only_gcn_is_ground_only() {
        let ground: Vec<_> = Scheme::ALL.into_iter().filter(|k| k.ground_only()).collect();
        assert_eq!(ground, vec![Scheme::GcnOsg]);
        assert!(!Scheme::GcnOsg.caches() && !Scheme::MctnOss.caches());
    }
}
