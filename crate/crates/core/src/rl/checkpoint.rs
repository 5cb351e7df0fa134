//! Binary checkpoint format for trained networks.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! offset size  field
//! 0      8     magic "IDXQNET\x01"
//! 8      4     format version (u32, currently 1)
//! 12     8     learning_rate (f64)
//! 20     8     gamma (f64)
//! 28     8     epsilon (f64)
//! 36     1     epsilon_is_explore (u8 bool)
//! 37     8     replay_capacity (u64)
//! 45     4     batch_size (u32)
//! 49     4     target_sync_every (u32)
//! 53     4     update_every_steps (u32)
//! 57     1     optimizer (0 = sgd, 1 = adam)
//! 58     1     loss (0 = squared, 1 = huber)
//! 59     4     state_dim (u32)
//! 63     4     action_dim (u32)
//! 67     4     hidden layer count (u32)
//! ...    4*    hidden widths (u32 each)
//! ```
//!
//! followed by each layer (trunk in depth order, then the value head,
//! then the advantage head) as `rows (u32), cols (u32), weights
//! (rows*cols f64, row-major), biases (rows f64)`. Floats are written
//! bit-exactly, so save/load round-trips reproduce forwards bit for bit.

use std::path::Path;

use crate::error::{Error, Result};

use super::net::{Layer, QNetwork};
use super::{Hyperparams, LossKind, OptimizerKind};

const MAGIC: &[u8; 8] = b"IDXQNET\x01";
const FORMAT_VERSION: u32 = 1;

pub fn to_bytes(net: &QNetwork, hyper: &Hyperparams) -> Vec<u8> {
    let mut out = Vec::with_capacity(128 + net.param_count() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&hyper.learning_rate.to_le_bytes());
    out.extend_from_slice(&hyper.gamma.to_le_bytes());
    out.extend_from_slice(&hyper.epsilon.to_le_bytes());
    out.push(hyper.epsilon_is_explore as u8);
    out.extend_from_slice(&(hyper.replay_capacity as u64).to_le_bytes());
    out.extend_from_slice(&(hyper.batch_size as u32).to_le_bytes());
    out.extend_from_slice(&(hyper.target_sync_every as u32).to_le_bytes());
    out.extend_from_slice(&(hyper.update_every_steps as u32).to_le_bytes());
    out.push(match hyper.optimizer {
        OptimizerKind::Sgd => 0,
        OptimizerKind::Adam => 1,
    });
    out.push(match hyper.loss {
        LossKind::Squared => 0,
        LossKind::Huber => 1,
    });
    out.extend_from_slice(&(net.state_dim as u32).to_le_bytes());
    out.extend_from_slice(&(net.action_dim as u32).to_le_bytes());
    out.extend_from_slice(&(net.hidden.len() as u32).to_le_bytes());
    for &width in &net.hidden {
        out.extend_from_slice(&(width as u32).to_le_bytes());
    }
    for layer in net
        .trunk
        .iter()
        .chain([&net.value_head, &net.advantage_head])
    {
        out.extend_from_slice(&(layer.rows as u32).to_le_bytes());
        out.extend_from_slice(&(layer.cols as u32).to_le_bytes());
        for w in &layer.w {
            out.extend_from_slice(&w.to_le_bytes());
        }
        for b in &layer.b {
            out.extend_from_slice(&b.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let slice = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(slice)
            }
            None => Err(Error::Checkpoint("checkpoint is truncated".into())),
        }
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64_vec(&mut self, n: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            out.push(self.f64()?);
        }
        Ok(out)
    }
}

pub fn from_bytes(bytes: &[u8]) -> Result<(QNetwork, Hyperparams)> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(Error::Checkpoint(
            "bad magic; not a network checkpoint".into(),
        ));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported checkpoint format version {version}, expected {FORMAT_VERSION}"
        )));
    }
    let learning_rate = r.f64()?;
    let gamma = r.f64()?;
    let epsilon = r.f64()?;
    let epsilon_is_explore = r.u8()? != 0;
    let replay_capacity = r.u64()? as usize;
    let batch_size = r.u32()? as usize;
    let target_sync_every = r.u32()? as usize;
    let update_every_steps = r.u32()? as usize;
    let optimizer = match r.u8()? {
        0 => OptimizerKind::Sgd,
        1 => OptimizerKind::Adam,
        other => return Err(Error::Checkpoint(format!("unknown optimizer tag {other}"))),
    };
    let loss = match r.u8()? {
        0 => LossKind::Squared,
        1 => LossKind::Huber,
        other => return Err(Error::Checkpoint(format!("unknown loss tag {other}"))),
    };
    let hyper = Hyperparams {
        learning_rate,
        gamma,
        epsilon,
        epsilon_is_explore,
        replay_capacity,
        batch_size,
        target_sync_every,
        update_every_steps,
        optimizer,
        loss,
    };
    hyper
        .validate()
        .map_err(|e| Error::Checkpoint(format!("stored hyperparameters are invalid: {e}")))?;

    let state_dim = r.u32()? as usize;
    let action_dim = r.u32()? as usize;
    let hidden_count = r.u32()? as usize;
    if hidden_count > 64 {
        return Err(Error::Checkpoint(format!(
            "implausible trunk depth {hidden_count}"
        )));
    }
    let mut hidden = Vec::with_capacity(hidden_count);
    for _ in 0..hidden_count {
        hidden.push(r.u32()? as usize);
    }

    let mut read_layer = |rows_want: usize, cols_want: usize, name: &str| -> Result<Layer> {
        let rows = r.u32()? as usize;
        let cols = r.u32()? as usize;
        if rows != rows_want || cols != cols_want {
            return Err(Error::Checkpoint(format!(
                "{name} is {rows}x{cols}, shape header implies {rows_want}x{cols_want}"
            )));
        }
        let w = r.f64_vec(rows * cols)?;
        let b = r.f64_vec(rows)?;
        Ok(Layer { rows, cols, w, b })
    };

    let mut trunk = Vec::with_capacity(hidden_count);
    let mut input = state_dim;
    for (i, &width) in hidden.iter().enumerate() {
        trunk.push(read_layer(width, input, &format!("trunk layer {i}"))?);
        input = width;
    }
    let value_head = read_layer(1, input, "value head")?;
    let advantage_head = read_layer(action_dim, input, "advantage head")?;
    if r.pos != bytes.len() {
        return Err(Error::Checkpoint(format!(
            "{} trailing bytes after the advantage head",
            bytes.len() - r.pos
        )));
    }
    let net = QNetwork {
        state_dim,
        action_dim,
        hidden,
        trunk,
        value_head,
        advantage_head,
    };
    if net.state_dim == 0 || net.action_dim == 0 || net.hidden.is_empty() {
        return Err(Error::Checkpoint(
            "checkpoint describes a degenerate network".into(),
        ));
    }
    Ok((net, hyper))
}

pub fn save(path: &Path, net: &QNetwork, hyper: &Hyperparams) -> Result<()> {
    std::fs::write(path, to_bytes(net, hyper))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<(QNetwork, Hyperparams)> {
    let bytes = std::fs::read(path)?;
    from_bytes(&bytes)
}
