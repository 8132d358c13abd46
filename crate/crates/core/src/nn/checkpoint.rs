//! Checkpoint container.
//!
//! A UTF-8 header of space-separated lines, terminated by `end`, followed by
//! every parameter as a little-endian f32, layer by layer, weight then bias:
//!
//! ```text
//! combcnn-checkpoint 1
//! seed 1
//! alphabet 61 62 63 ...            (hex code points)
//! input combinatorial 10 56 none log | input onehot 20
//! shape 56 56 56
//! layer conv2d 32 1 1 1            (filters kh kw stride)
//! layer maxpool2d 2 2
//! layer dense 64
//! layer relu | flatten | sigmoid
//! params 74849
//! end
//! ```

use std::fs;
use std::path::Path;

use super::network::{InputSpec, ModelParams, Network};
use super::{LayerSpec, Shape};
use crate::encoding::{EncodingConfig, Normalization};
use crate::error::{Error, Result};
use crate::word::Alphabet;

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &str = "combcnn-checkpoint";

pub fn write_checkpoint(model: &ModelParams) -> Vec<u8> {
    let net = &model.network;
    let mut h = format!("{MAGIC} {CHECKPOINT_VERSION}\nseed {}\nalphabet", model.seed);
    for c in model.alphabet.letters() {
        h.push_str(&format!(" {:x}", *c as u32));
    }
    h.push('\n');
    match model.input {
        InputSpec::Combinatorial(cfg) => {
            let cap = cfg.nu_cap_len.map_or("none".to_string(), |c| c.to_string());
            h.push_str(&format!(
                "input combinatorial {} {} {cap} {}\n",
                cfg.word_length,
                cfg.pad_to,
                cfg.normalization.name()
            ));
        }
        InputSpec::OneHot { word_length } => h.push_str(&format!("input onehot {word_length}\n")),
    }
    let s = net.input_shape();
    h.push_str(&format!("shape {} {} {}\n", s.h, s.w, s.c));
    for layer in net.layers() {
        let line = match *layer {
            LayerSpec::Conv2d {
                filters,
                kernel: (kh, kw),
                stride,
            } => format!("conv2d {filters} {kh} {kw} {stride}"),
            LayerSpec::MaxPool2d { size: (ph, pw) } => format!("maxpool2d {ph} {pw}"),
            LayerSpec::Dense { units } => format!("dense {units}"),
            other => other.kind().to_string(),
        };
        h.push_str(&format!("layer {line}\n"));
    }
    h.push_str(&format!("params {}\nend\n", net.param_count()));
    let mut bytes = h.into_bytes();
    for p in net.params() {
        for x in p.weight.iter().chain(&p.bias) {
            bytes.extend_from_slice(&x.to_le_bytes());
        }
    }
    bytes
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

fn num<T: std::str::FromStr>(s: Option<&str>, what: &str) -> Result<T> {
    s.and_then(|s| s.parse().ok())
        .ok_or_else(|| bad(format!("bad or missing {what}")))
}

pub fn read_checkpoint(bytes: &[u8]) -> Result<ModelParams> {
    const END: &[u8] = b"\nend\n";
    let header_end = bytes
        .windows(END.len())
        .position(|w| w == END)
        .ok_or_else(|| bad("header terminator not found"))?
        + END.len();
    let header = std::str::from_utf8(&bytes[..header_end]).map_err(|_| bad("header is not UTF-8"))?;
    let mut lines = header.lines();

    let mut first = lines.next().unwrap_or("").split(' ');
    if first.next() != Some(MAGIC) {
        return Err(bad("not a combcnn checkpoint"));
    }
    let version: u32 = num(first.next(), "version")?;
    if version != CHECKPOINT_VERSION {
        return Err(bad(format!(
            "version {version} is not supported (expected {CHECKPOINT_VERSION})"
        )));
    }

    let mut seed = None;
    let mut alphabet = None;
    let mut input = None;
    let mut shape = None;
    let mut layers = Vec::new();
    let mut params = None;
    for line in lines {
        let mut f = line.split(' ');
        match f.next() {
            Some("seed") => seed = Some(num::<u64>(f.next(), "seed")?),
            Some("alphabet") => {
                let letters = f
                    .map(|h| {
                        u32::from_str_radix(h, 16)
                            .ok()
                            .and_then(char::from_u32)
                            .ok_or_else(|| bad(format!("bad code point {h:?}")))
                    })
                    .collect::<Result<Vec<char>>>()?;
                alphabet = Some(Alphabet::new(letters)?);
            }
            Some("input") => {
                input = Some(match f.next() {
                    Some("combinatorial") => {
                        let word_length = num(f.next(), "word length")?;
                        let pad_to = num(f.next(), "pad_to")?;
                        let nu_cap_len = match f.next() {
                            Some("none") => None,
                            other => Some(num(other, "nu cap")?),
                        };
                        let normalization = Normalization::parse(f.next().unwrap_or(""))
                            .map_err(|_| bad("bad normalization"))?;
                        InputSpec::Combinatorial(EncodingConfig {
                            word_length,
                            pad_to,
                            nu_cap_len,
                            normalization,
                        })
                    }
                    Some("onehot") => InputSpec::OneHot {
                        word_length: num(f.next(), "word length")?,
                    },
                    other => return Err(bad(format!("unknown input kind {other:?}"))),
                })
            }
            Some("shape") => {
                shape = Some(Shape::new(
                    num(f.next(), "shape")?,
                    num(f.next(), "shape")?,
                    num(f.next(), "shape")?,
                ))
            }
            Some("layer") => layers.push(match f.next() {
                Some("conv2d") => LayerSpec::Conv2d {
                    filters: num(f.next(), "filters")?,
                    kernel: (num(f.next(), "kernel")?, num(f.next(), "kernel")?),
                    stride: num(f.next(), "stride")?,
                },
                Some("maxpool2d") => LayerSpec::MaxPool2d {
                    size: (num(f.next(), "pool size")?, num(f.next(), "pool size")?),
                },
                Some("dense") => LayerSpec::Dense {
                    units: num(f.next(), "units")?,
                },
                Some("relu") => LayerSpec::Relu,
                Some("flatten") => LayerSpec::Flatten,
                Some("sigmoid") => LayerSpec::Sigmoid,
                other => return Err(bad(format!("unknown layer {other:?}"))),
            }),
            Some("params") => params = Some(num::<usize>(f.next(), "parameter count")?),
            Some("end") => break,
            other => return Err(bad(format!("unexpected header line {other:?}"))),
        }
    }
    let shape = shape.ok_or_else(|| bad("missing shape"))?;
    let mut network: Network<f32> = Network::new(shape, layers)?;
    let count = params.ok_or_else(|| bad("missing parameter count"))?;
    if count != network.param_count() {
        return Err(bad(format!(
            "header declares {count} parameters but the layers need {}",
            network.param_count()
        )));
    }
    let blob = &bytes[header_end..];
    if blob.len() != count * 4 {
        return Err(Error::TruncatedBlob {
            expected: count * 4,
            actual: blob.len(),
        });
    }
    let mut values = blob
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]));
    for p in network.params_mut() {
        for x in p.weight.iter_mut().chain(p.bias.iter_mut()) {
            *x = values.next().expect("length checked");
            if !x.is_finite() {
                return Err(bad("non-finite parameter"));
            }
        }
    }
    Ok(ModelParams {
        network,
        input: input.ok_or_else(|| bad("missing input spec"))?,
        alphabet: alphabet.ok_or_else(|| bad("missing alphabet"))?,
        seed: seed.ok_or_else(|| bad("missing seed"))?,
    })
}

pub fn save_checkpoint(model: &ModelParams, path: &Path) -> Result<()> {
    fs::write(path, write_checkpoint(model)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<ModelParams> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    read_checkpoint(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{build_char_cnn, build_combinatorial_cnn};

    fn model() -> ModelParams {
        build_combinatorial_cnn(&EncodingConfig::for_length(5), Alphabet::lowercase(), 7).unwrap()
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let m = model();
        let back = read_checkpoint(&write_checkpoint(&m)).unwrap();
        assert_eq!(back, m);
        let c = build_char_cnn(9, Alphabet::printable_ascii(), 2).unwrap();
        assert_eq!(read_checkpoint(&write_checkpoint(&c)).unwrap(), c);
    }

    #[test]
    fn short_blob_reports_sizes() {
        let m = model();
        let mut bytes = write_checkpoint(&m);
        bytes.truncate(bytes.len() - 4);
        let expected = m.network.param_count() * 4;
        match read_checkpoint(&bytes) {
            Err(Error::TruncatedBlob { expected: e, actual }) => {
                assert_eq!(e, expected);
                assert_eq!(actual, expected - 4);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn corrupted_header_and_version() {
        let bytes = write_checkpoint(&model());
        let mut corrupt = bytes.clone();
        corrupt[0] = b'X';
        assert!(matches!(read_checkpoint(&corrupt), Err(Error::Checkpoint(_))));
        let text = String::from_utf8_lossy(&bytes[..40]).replace("checkpoint 1", "checkpoint 9");
        let mut other = text.into_bytes();
        other.extend_from_slice(&bytes[40..]);
        match read_checkpoint(&other) {
            Err(Error::Checkpoint(msg)) => assert!(msg.contains("version 9")),
            r => panic!("unexpected {r:?}"),
        }
    }
}
