//! Encoder architecture descriptions. A spec plus a vocabulary size pins
//! the parameter set exactly.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncoderKind {
    BowLinear,
    BowMlp,
    Cnn,
    Lstm,
    Transformer,
}

pub const ALL_KINDS: [EncoderKind; 5] = [
    EncoderKind::BowLinear,
    EncoderKind::BowMlp,
    EncoderKind::Cnn,
    EncoderKind::Lstm,
    EncoderKind::Transformer,
];

impl EncoderKind {
    pub fn name(&self) -> &'static str {
        match self {
            EncoderKind::BowLinear => "bow-linear",
            EncoderKind::BowMlp => "bow-mlp",
            EncoderKind::Cnn => "cnn",
            EncoderKind::Lstm => "lstm",
            EncoderKind::Transformer => "transformer",
        }
    }

    pub fn from_name(s: &str) -> Result<EncoderKind> {
        ALL_KINDS
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown model '{s}'")))
    }

    /// Bag-of-words encoders discard token order entirely.
    pub fn is_bow(&self) -> bool {
        matches!(self, EncoderKind::BowLinear | EncoderKind::BowMlp)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderSpec {
    pub kind: EncoderKind,
    pub embed_dim: usize,
    pub hidden: usize,
    pub layers: usize,
    pub heads: usize,
    pub filter_width: usize,
    pub num_classes: usize,
    /// Transformer only: add the fixed positional table before the first
    /// layer. Off, the encoder is permutation invariant.
    pub use_positions: bool,
}

impl EncoderSpec {
    pub fn new(kind: EncoderKind, num_classes: usize) -> EncoderSpec {
        EncoderSpec {
            kind,
            embed_dim: 64,
            hidden: 64,
            layers: if kind == EncoderKind::Transformer { 4 } else { 1 },
            heads: 4,
            filter_width: 3,
            num_classes,
            use_positions: true,
        }
    }

    /// Same architecture at a smaller width, for cheap tests.
    pub fn tiny(kind: EncoderKind, num_classes: usize, d: usize) -> EncoderSpec {
        let mut s = EncoderSpec::new(kind, num_classes);
        s.embed_dim = d;
        s.hidden = d;
        s.heads = if d % 4 == 0 { 4 } else { 1 };
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(Error::InvalidConfig("need at least 2 classes".into()));
        }
        if self.embed_dim == 0 || self.hidden == 0 {
            return Err(Error::InvalidConfig("zero-width encoder".into()));
        }
        match self.kind {
            EncoderKind::Transformer => {
                if self.layers != 4 {
                    return Err(Error::InvalidConfig(format!(
                        "transformer is fixed at 4 layers, got {}",
                        self.layers
                    )));
                }
                if self.embed_dim % self.heads != 0 {
                    return Err(Error::InvalidConfig(format!(
                        "embed_dim {} not divisible by {} heads",
                        self.embed_dim, self.heads
                    )));
                }
            }
            EncoderKind::Cnn => {
                if self.filter_width != 3 {
                    return Err(Error::InvalidConfig(format!(
                        "cnn filter width is fixed at 3, got {}",
                        self.filter_width
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Width of the pooled representation feeding the output layer.
    pub fn pooled_dim(&self) -> usize {
        match self.kind {
            EncoderKind::BowLinear | EncoderKind::Transformer => self.embed_dim,
            EncoderKind::BowMlp | EncoderKind::Cnn | EncoderKind::Lstm => self.hidden,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_protocol() {
        let s = EncoderSpec::new(EncoderKind::Transformer, 3);
        assert_eq!((s.embed_dim, s.hidden, s.layers, s.heads), (64, 64, 4, 4));
        let s = EncoderSpec::new(EncoderKind::Cnn, 3);
        assert_eq!((s.layers, s.filter_width), (1, 3));
        assert!(s.validate().is_ok());
    }

    #[test]
    fn invalid_shapes_are_rejected() {
        let mut s = EncoderSpec::new(EncoderKind::Transformer, 3);
        s.layers = 2;
        assert!(s.validate().is_err());
        let mut s = EncoderSpec::new(EncoderKind::Cnn, 3);
        s.filter_width = 5;
        assert!(s.validate().is_err());
        let mut s = EncoderSpec::new(EncoderKind::Transformer, 3);
        s.embed_dim = 30;
        assert!(s.validate().is_err());
        assert!(EncoderSpec::new(EncoderKind::BowLinear, 1).validate().is_err());
    }

    #[test]
    fn names_roundtrip() {
        for kind in ALL_KINDS {
            assert_eq!(EncoderKind::from_name(kind.name()).unwrap(), kind);
        }
        assert!(EncoderKind::from_name("gru").is_err());
    }
}
