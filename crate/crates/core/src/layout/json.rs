use serde::{Deserialize, Serialize};

use super::{Coord, LayoutGrid, LayoutKind, MsDensity, Role};
use crate::error::{Error, Result};

/// On-disk layout: role matrix as strings of `D`/`A`/`M`/`#`, placement
/// indexed by logical qubit, magic-state coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutDump {
    pub height: usize,
    pub width: usize,
    pub kind: LayoutKind,
    pub ms_density: MsDensity,
    pub roles: Vec<String>,
    pub placement: Vec<Coord>,
    pub ms: Vec<Coord>,
}

impl LayoutGrid {
    pub fn to_dump(&self) -> LayoutDump {
        LayoutDump {
            height: self.height,
            width: self.width,
            kind: self.kind,
            ms_density: self.ms_density,
            roles: self.ascii(),
            placement: self.placement.clone(),
            ms: self.ms_patches.clone(),
        }
    }

    pub fn from_dump(dump: &LayoutDump) -> Result<Self> {
        let roles = dump
            .roles
            .iter()
            .map(|r| {
                r.chars()
                    .map(|ch| {
                        Role::from_symbol(ch)
                            .ok_or_else(|| Error::Layout(format!("unknown cell symbol `{ch}`")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        if roles.len() != dump.height || roles.iter().any(|r| r.len() != dump.width) {
            return Err(Error::Layout("role matrix does not match height/width".into()));
        }
        let grid = LayoutGrid::from_roles(&roles, dump.placement.clone(), dump.kind, dump.ms_density)?;
        let mut listed = dump.ms.clone();
        listed.sort();
        if listed != grid.ms_patches {
            return Err(Error::Layout("ms list disagrees with role matrix".into()));
        }
        Ok(grid)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_dump()).expect("layout serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dump: LayoutDump =
            serde_json::from_str(text).map_err(|e| Error::Layout(format!("layout json: {e}")))?;
        Self::from_dump(&dump)
    }
}

#[cfg(test)]
mod tests {
    use crate::layout::*;

    #[test]
    fn json_round_trip() {
        let g = build_layout(LayoutKind::TwoThirdsFilling, 10, MsDensity::Abundant).unwrap();
        let back = LayoutGrid::from_json(&g.to_json()).unwrap();
        assert_eq!(back.to_dump(), g.to_dump());
    }
}
