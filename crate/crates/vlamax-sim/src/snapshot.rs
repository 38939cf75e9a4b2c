//! Snapshots of particle states in a binary and a JSON encoding.
//!
//! Binary layout, all little endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 8 | magic `VLMXSNAP` |
//! | 4 | format version `u32` (currently 1) |
//! | 4 | role `u32`: 0 micro, 1 reference, 2 tracer |
//! | 8 | particle count `N` as `u64` |
//! | 8 | cut-off radius `r_N` as `f64` |
//! | 8 | time step `dt` as `f64` |
//! | 8 | time `t` as `f64` |
//! | 8 | seed `u64` |
//! | 24 N | positions `x`, three `f64` per particle |
//! | 24 N | momenta `xi` |
//! | 24 N | recorded forces `K` |
//!
//! A trajectory file is the magic `VLMXTRAJ`, a `u32` version, a `u64` frame
//! count and that many snapshots back to back.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};
use vlamax_fields::history::TrajectoryHistory;
use vlamax_kinematics::{PhaseState, Vec3};

use crate::dynamics::Ensemble;
use crate::error::{Result, SimError};

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"VLMXSNAP";
pub const TRAJECTORY_MAGIC: &[u8; 8] = b"VLMXTRAJ";
pub const FORMAT_VERSION: u32 = 1;

/// What an ensemble represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    /// Charges of the microscopic dynamics.
    Micro,
    /// Characteristics of the mean-field reference ensemble.
    Reference,
    /// Mean-field characteristics started at the microscopic configuration.
    Tracer,
}

impl Role {
    fn code(self) -> u32 {
        match self {
            Role::Micro => 0,
            Role::Reference => 1,
            Role::Tracer => 2,
        }
    }

    fn from_code(c: u32) -> Result<Self> {
        match c {
            0 => Ok(Role::Micro),
            1 => Ok(Role::Reference),
            2 => Ok(Role::Tracer),
            _ => Err(SimError::Snapshot(format!("unknown role code {c}"))),
        }
    }
}

/// Particle states at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub format: u32,
    pub role: Role,
    pub r_n: f64,
    pub dt: f64,
    pub t: f64,
    pub seed: u64,
    pub x: Vec<[f64; 3]>,
    pub xi: Vec<[f64; 3]>,
    pub k: Vec<[f64; 3]>,
}

fn arr(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

fn vec3(a: &[f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

impl Snapshot {
    /// The ensemble after step `n`.
    pub fn from_ensemble(ens: &Ensemble, n: usize, role: Role, r_n: f64, seed: u64) -> Self {
        let samples: Vec<_> = ens.histories().iter().map(|h| h.samples()[n]).collect();
        Self {
            format: FORMAT_VERSION,
            role,
            r_n,
            dt: ens.dt(),
            t: n as f64 * ens.dt(),
            seed,
            x: samples.iter().map(|s| arr(&s.x)).collect(),
            xi: samples.iter().map(|s| arr(&s.xi)).collect(),
            k: samples.iter().map(|s| arr(&s.k)).collect(),
        }
    }

    /// Snapshots after every step.
    pub fn frames(ens: &Ensemble, role: Role, r_n: f64, seed: u64) -> Vec<Self> {
        (0..=ens.steps()).map(|n| Self::from_ensemble(ens, n, role, r_n, seed)).collect()
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn positions(&self) -> Vec<Vec3> {
        self.x.iter().map(vec3).collect()
    }

    pub fn states(&self) -> Vec<PhaseState> {
        self.x.iter().zip(&self.xi).map(|(x, xi)| PhaseState::new(vec3(x), vec3(xi))).collect()
    }

    pub fn forces(&self) -> Vec<Vec3> {
        self.k.iter().map(vec3).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.format != FORMAT_VERSION {
            return Err(SimError::Snapshot(format!("unsupported format version {}", self.format)));
        }
        if self.xi.len() != self.n() || self.k.len() != self.n() {
            return Err(SimError::Snapshot("array lengths differ".into()));
        }
        Ok(())
    }

    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        self.validate()?;
        w.write_all(SNAPSHOT_MAGIC)?;
        w.write_u32::<LE>(self.format)?;
        w.write_u32::<LE>(self.role.code())?;
        w.write_u64::<LE>(self.n() as u64)?;
        w.write_f64::<LE>(self.r_n)?;
        w.write_f64::<LE>(self.dt)?;
        w.write_f64::<LE>(self.t)?;
        w.write_u64::<LE>(self.seed)?;
        for block in [&self.x, &self.xi, &self.k] {
            for v in block.iter() {
                for c in v {
                    w.write_f64::<LE>(*c)?;
                }
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != SNAPSHOT_MAGIC {
            return Err(SimError::Snapshot("bad magic".into()));
        }
        let format = r.read_u32::<LE>()?;
        if format != FORMAT_VERSION {
            return Err(SimError::Snapshot(format!("unsupported format version {format}")));
        }
        let role = Role::from_code(r.read_u32::<LE>()?)?;
        let n = usize::try_from(r.read_u64::<LE>()?).map_err(|_| SimError::Snapshot("count overflow".into()))?;
        let r_n = r.read_f64::<LE>()?;
        let dt = r.read_f64::<LE>()?;
        let t = r.read_f64::<LE>()?;
        let seed = r.read_u64::<LE>()?;
        let mut block = || -> Result<Vec<[f64; 3]>> {
            (0..n).map(|_| Ok([r.read_f64::<LE>()?, r.read_f64::<LE>()?, r.read_f64::<LE>()?])).collect()
        };
        let x = block()?;
        let xi = block()?;
        let k = block()?;
        Ok(Self { format, role, r_n, dt, t, seed, x, xi, k })
    }

    pub fn to_json(&self) -> Result<String> {
        self.validate()?;
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let snap: Self = serde_json::from_str(s)?;
        snap.validate()?;
        Ok(snap)
    }

    /// Writes JSON for a `.json` extension and binary otherwise.
    pub fn save(&self, path: &Path) -> Result<()> {
        if path.extension().is_some_and(|e| e == "json") {
            std::fs::write(path, self.to_json()?)?;
        } else {
            let mut w = BufWriter::new(File::create(path)?);
            self.write_binary(&mut w)?;
            w.flush()?;
        }
        Ok(())
    }

    /// Reads either encoding, recognized by the leading bytes.
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        if bytes.starts_with(SNAPSHOT_MAGIC) {
            Self::read_binary(&mut bytes.as_slice())
        } else {
            Self::from_json(std::str::from_utf8(&bytes).map_err(|e| SimError::Snapshot(e.to_string()))?)
        }
    }
}

/// Writes all frames of a trajectory.
pub fn write_trajectory(path: &Path, frames: &[Snapshot]) -> Result<()> {
    let tmp = path.with_extension("partial");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        w.write_all(TRAJECTORY_MAGIC)?;
        w.write_u32::<LE>(FORMAT_VERSION)?;
        w.write_u64::<LE>(frames.len() as u64)?;
        for f in frames {
            f.write_binary(&mut w)?;
        }
        w.flush()?;
    }
    std::fs::rename(tmp, path)?;
    Ok(())
}

/// Reads a trajectory written by [`write_trajectory`].
pub fn read_trajectory(path: &Path) -> Result<Vec<Snapshot>> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != TRAJECTORY_MAGIC {
        return Err(SimError::Snapshot("bad trajectory magic".into()));
    }
    let version = r.read_u32::<LE>()?;
    if version != FORMAT_VERSION {
        return Err(SimError::Snapshot(format!("unsupported trajectory version {version}")));
    }
    let count = r.read_u64::<LE>()?;
    (0..count).map(|_| Snapshot::read_binary(&mut r)).collect()
}

/// Rebuilds an ensemble with full histories from consecutive frames.
pub fn ensemble_from_frames(frames: &[Snapshot], weight: f64) -> Result<Ensemble> {
    let first = frames.first().ok_or_else(|| SimError::Snapshot("no frames".into()))?;
    let n = first.n();
    if frames.iter().any(|f| f.n() != n || f.dt != first.dt) {
        return Err(SimError::Snapshot("frames differ in size or step".into()));
    }
    let histories = (0..n)
        .map(|i| {
            let mut h = TrajectoryHistory::new(
                first.dt,
                &PhaseState::new(vec3(&first.x[i]), vec3(&first.xi[i])),
                vec3(&first.k[i]),
            );
            for f in &frames[1..] {
                h.push(vec3(&f.x[i]), vec3(&f.xi[i]), vec3(&f.k[i]));
            }
            h
        })
        .collect();
    Ensemble::from_histories(histories, weight)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Snapshot {
        Snapshot {
            format: FORMAT_VERSION,
            role: Role::Reference,
            r_n: 0.5,
            dt: 0.01,
            t: 0.3,
            seed: 42,
            x: vec![[1.0, 2.0, 3.0], [-1.0, 0.5, 0.25]],
            xi: vec![[0.1, 0.2, 0.3], [0.0, 0.0, -0.5]],
            k: vec![[1e-3, 0.0, 0.0], [0.0, 2e-3, 0.0]],
        }
    }

    #[test]
    fn binary_layout_and_round_trip() {
        let s = sample();
        let mut buf = Vec::new();
        s.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 56 + 72 * 2);
        assert_eq!(&buf[..8], SNAPSHOT_MAGIC);
        assert_eq!(u32::from_le_bytes(buf[12..16].try_into().unwrap()), 1);
        assert_eq!(f64::from_le_bytes(buf[56..64].try_into().unwrap()), 1.0);
        assert_eq!(Snapshot::read_binary(&mut buf.as_slice()).unwrap(), s);
    }

    #[test]
    fn json_round_trip_and_role_tag() {
        let s = sample();
        let j = s.to_json().unwrap();
        assert!(j.contains("\"role\": \"reference\""));
        assert_eq!(Snapshot::from_json(&j).unwrap(), s);
    }

    #[test]
    fn corrupt_input_rejected() {
        let mut buf = Vec::new();
        sample().write_binary(&mut buf).unwrap();
        buf[0] = b'X';
        assert!(Snapshot::read_binary(&mut buf.as_slice()).is_err());
        let mut short = Vec::new();
        sample().write_binary(&mut short).unwrap();
        short.truncate(70);
        assert!(Snapshot::read_binary(&mut short.as_slice()).is_err());
        let mut bad = sample();
        bad.k.pop();
        assert!(bad.to_json().is_err());
    }
}
