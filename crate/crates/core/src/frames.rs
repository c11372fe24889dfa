//! Binary point-frame codec and sweep assembler standing in for the
//! acquisition front end.
//!
//! Wire layout, 20 bytes little-endian, CRC-16/CCITT-FALSE over bytes
//! 2..=17 (version through the last imag byte):
//!
//! ```text
//! offset  size  field
//!      0     2  magic 0xA5 0x5A
//!      2     1  version (0x01)
//!      3     2  sweep_id (u16 LE)
//!      5     1  point_index (u8)
//!      6     4  frequency_hz (f32 LE)
//!     10     4  real ohms (f32 LE)
//!     14     4  imag ohms (f32 LE)
//!     18     2  crc16 (LE)
//! ```
//!
//! Values travel as 32-bit floats for embedded realism; assembly back into
//! 64-bit spectra therefore tolerates 0.01% relative frequency quantization
//! error against the expected grid.

use crate::spectrum::{ComplexImpedance, FrequencyGrid, Spectrum, SweepMeta};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FRAME_LEN: usize = 20;
pub const MAGIC: [u8; 2] = [0xA5, 0x5A];
pub const VERSION: u8 = 0x01;
const CRC_RANGE: std::ops::Range<usize> = 2..18;

/// Maximum points per sweep (the point index is a single byte).
pub const MAX_SWEEP_POINTS: usize = 256;

/// Relative tolerance for frequency agreement at assembly.
pub const GRID_TOLERANCE_REL: f64 = 1e-4;

#[derive(Debug, Error, PartialEq)]
pub enum FrameError {
    #[error("frame must be {FRAME_LEN} bytes, got {0}")]
    BadLength(usize),
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported frame version {0:#04x}")]
    BadVersion(u8),
    #[error("CRC mismatch: stored {stored:#06x}, computed {computed:#06x}")]
    BadCrc { stored: u16, computed: u16 },
    #[error("frame frequency must be positive and finite, got {0}")]
    BadFrequency(f32),
    #[error("sweep has {0} points; at most {MAX_SWEEP_POINTS} fit in a frame index")]
    SweepTooLong(usize),
    #[error("frames carry mixed sweep ids {0} and {1}")]
    MixedSweepIds(u16, u16),
    #[error("conflicting duplicate for point {index}")]
    ConflictingDuplicate { index: usize },
    #[error("missing points {indices:?}")]
    MissingPoints { indices: Vec<usize> },
    #[error("frame {index} does not match the expected grid: {detail}")]
    GridMismatch { index: usize, detail: String },
    #[error(transparent)]
    Spectrum(#[from] crate::spectrum::SpectrumError),
}

/// One acquisition measurement on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointFrame {
    pub sweep_id: u16,
    pub point_index: u8,
    pub frequency_hz: f32,
    pub real: f32,
    pub imag: f32,
}

/// Bitwise (MSB-first) CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no
/// reflection, no xorout. Check value over `"123456789"` is 0x29B1.
pub fn crc16_ccitt_false(data: &[u8]) -> u16 {
    let mut crc: u16 = 0xFFFF;
    for &byte in data {
        crc ^= (byte as u16) << 8;
        for _ in 0..8 {
            crc = if crc & 0x8000 != 0 {
                (crc << 1) ^ 0x1021
            } else {
                crc << 1
            };
        }
    }
    crc
}

/// Encodes one frame into its 20-byte wire form.
pub fn encode_frame(p: &PointFrame) -> Result<[u8; FRAME_LEN], FrameError> {
    if !(p.frequency_hz > 0.0 && p.frequency_hz.is_finite()) {
        return Err(FrameError::BadFrequency(p.frequency_hz));
    }
    let mut b = [0u8; FRAME_LEN];
    b[0] = MAGIC[0];
    b[1] = MAGIC[1];
    b[2] = VERSION;
    b[3..5].copy_from_slice(&p.sweep_id.to_le_bytes());
    b[5] = p.point_index;
    b[6..10].copy_from_slice(&p.frequency_hz.to_le_bytes());
    b[10..14].copy_from_slice(&p.real.to_le_bytes());
    b[14..18].copy_from_slice(&p.imag.to_le_bytes());
    let crc = crc16_ccitt_false(&b[CRC_RANGE]);
    b[18..20].copy_from_slice(&crc.to_le_bytes());
    Ok(b)
}

/// Parses and verifies arbitrary bytes as a frame.
pub fn decode_frame(bytes: &[u8]) -> Result<PointFrame, FrameError> {
    if bytes.len() != FRAME_LEN {
        return Err(FrameError::BadLength(bytes.len()));
    }
    if bytes[0] != MAGIC[0] || bytes[1] != MAGIC[1] {
        return Err(FrameError::BadMagic);
    }
    if bytes[2] != VERSION {
        return Err(FrameError::BadVersion(bytes[2]));
    }
    let stored = u16::from_le_bytes([bytes[18], bytes[19]]);
    let computed = crc16_ccitt_false(&bytes[CRC_RANGE]);
    if stored != computed {
        return Err(FrameError::BadCrc { stored, computed });
    }
    Ok(PointFrame {
        sweep_id: u16::from_le_bytes([bytes[3], bytes[4]]),
        point_index: bytes[5],
        frequency_hz: f32::from_le_bytes(bytes[6..10].try_into().unwrap()),
        real: f32::from_le_bytes(bytes[10..14].try_into().unwrap()),
        imag: f32::from_le_bytes(bytes[14..18].try_into().unwrap()),
    })
}

/// One frame per grid point, in index order.
pub fn stream_sweep(s: &Spectrum, sweep_id: u16) -> Result<Vec<PointFrame>, FrameError> {
    if s.len() > MAX_SWEEP_POINTS {
        return Err(FrameError::SweepTooLong(s.len()));
    }
    Ok(s.grid()
        .points()
        .iter()
        .zip(s.values())
        .enumerate()
        .map(|(i, (&f, z))| PointFrame {
            sweep_id,
            point_index: i as u8,
            frequency_hz: f as f32,
            real: z.real as f32,
            imag: z.imag as f32,
        })
        .collect())
}

/// Rebuilds a sweep from frames in any order. Identical retransmissions are
/// deduplicated; conflicting payloads for one index, missing indices and
/// frequency disagreement with `expected_grid` are errors.
pub fn assemble_sweep(
    frames: &[PointFrame],
    expected_grid: &FrequencyGrid,
) -> Result<Spectrum, FrameError> {
    let n = expected_grid.len();
    let mut slots: Vec<Option<PointFrame>> = vec![None; n];
    let mut sweep_id: Option<u16> = None;

    for frame in frames {
        match sweep_id {
            None => sweep_id = Some(frame.sweep_id),
            Some(id) if id != frame.sweep_id => {
                return Err(FrameError::MixedSweepIds(id, frame.sweep_id));
            }
            Some(_) => {}
        }
        let index = frame.point_index as usize;
        if index >= n {
            return Err(FrameError::GridMismatch {
                index,
                detail: format!("point index {index} exceeds grid length {n}"),
            });
        }
        let expected = expected_grid.points()[index];
        let got = frame.frequency_hz as f64;
        if ((got - expected) / expected).abs() > GRID_TOLERANCE_REL {
            return Err(FrameError::GridMismatch {
                index,
                detail: format!("frequency {got} Hz vs expected {expected} Hz"),
            });
        }
        match &slots[index] {
            None => slots[index] = Some(*frame),
            Some(existing) if existing == frame => {}
            Some(_) => return Err(FrameError::ConflictingDuplicate { index }),
        }
    }

    let missing: Vec<usize> = slots
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.is_none().then_some(i))
        .collect();
    if !missing.is_empty() {
        return Err(FrameError::MissingPoints { indices: missing });
    }

    let values: Vec<ComplexImpedance> = slots
        .into_iter()
        .map(|s| {
            let f = s.expect("missing checked above");
            ComplexImpedance::new(f.real as f64, f.imag as f64)
        })
        .collect();
    Ok(Spectrum::new(
        expected_grid.clone(),
        values,
        SweepMeta::default(),
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::CircuitModel;
    use crate::synth::simulate_sweep;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_frame() -> PointFrame {
        PointFrame {
            sweep_id: 0x1234,
            point_index: 57,
            frequency_hz: 1584.893,
            real: 100.25,
            imag: -99.75,
        }
    }

    fn sample_sweep() -> Spectrum {
        let c = CircuitModel::series(vec![
            CircuitModel::resistor(100.0),
            CircuitModel::capacitor(1e-6),
        ]);
        simulate_sweep(&c, &FrequencyGrid::standard(), 0.01, 5).unwrap()
    }

    #[test]
    fn header_constants() {
        let b = encode_frame(&sample_frame()).unwrap();
        assert_eq!(b.len(), FRAME_LEN);
        assert_eq!(&b[..3], &[0xA5, 0x5A, 0x01]);
    }

    #[test]
    fn crc_standard_check_value() {
        assert_eq!(crc16_ccitt_false(b"123456789"), 0x29B1);
        assert_eq!(
            crc16_ccitt_false(b"123456789"),
            bevid_testkit::crc::crc16_ccitt_false(b"123456789")
        );
    }

    #[test]
    fn crc_matches_reference_on_frame_payloads() {
        let b = encode_frame(&sample_frame()).unwrap();
        assert_eq!(
            crc16_ccitt_false(&b[2..18]),
            bevid_testkit::crc::crc16_ccitt_false(&b[2..18])
        );
    }

    #[test]
    fn decode_rejects_bad_inputs() {
        let good = encode_frame(&sample_frame()).unwrap();

        assert_eq!(decode_frame(&good[..18]), Err(FrameError::BadLength(18)));

        let mut bad_magic = good;
        bad_magic[0] = 0x00;
        assert_eq!(decode_frame(&bad_magic), Err(FrameError::BadMagic));

        let mut bad_version = good;
        bad_version[2] = 0x02;
        assert_eq!(decode_frame(&bad_version), Err(FrameError::BadVersion(2)));

        let mut flipped = good;
        flipped[10] ^= 0x04;
        assert!(matches!(
            decode_frame(&flipped),
            Err(FrameError::BadCrc { .. })
        ));
    }

    #[test]
    fn every_single_bit_corruption_is_detected() {
        let good = encode_frame(&sample_frame()).unwrap();
        assert_eq!(decode_frame(&good).unwrap(), sample_frame());
        for bit in 0..FRAME_LEN * 8 {
            let mut corrupted = good;
            corrupted[bit / 8] ^= 1 << (bit % 8);
            assert!(
                decode_frame(&corrupted).is_err(),
                "bit {bit} flip went undetected"
            );
        }
    }

    #[test]
    fn encode_rejects_nonpositive_frequency() {
        let mut p = sample_frame();
        p.frequency_hz = 0.0;
        assert_eq!(encode_frame(&p), Err(FrameError::BadFrequency(0.0)));
    }

    #[test]
    fn stream_assemble_round_trip() {
        let s = sample_sweep();
        let frames = stream_sweep(&s, 7).unwrap();
        assert_eq!(frames.len(), 101);
        let back = assemble_sweep(&frames, s.grid()).unwrap();
        for (a, b) in back.values().iter().zip(s.values()) {
            assert_eq!(a.real, b.real as f32 as f64);
            assert_eq!(a.imag, b.imag as f32 as f64);
        }
    }

    #[test]
    fn assembly_is_order_and_duplication_invariant() {
        let s = sample_sweep();
        let frames = stream_sweep(&s, 7).unwrap();
        let baseline = assemble_sweep(&frames, s.grid()).unwrap();

        let mut shuffled = frames.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        shuffled.shuffle(&mut rng);
        assert_eq!(assemble_sweep(&shuffled, s.grid()).unwrap(), baseline);

        let mut duplicated = frames.clone();
        duplicated.extend_from_slice(&frames[30..40]);
        duplicated.shuffle(&mut rng);
        assert_eq!(assemble_sweep(&duplicated, s.grid()).unwrap(), baseline);
    }

    #[test]
    fn dropped_frame_reports_missing_index() {
        let s = sample_sweep();
        let mut frames = stream_sweep(&s, 7).unwrap();
        frames.remove(57);
        assert_eq!(
            assemble_sweep(&frames, s.grid()),
            Err(FrameError::MissingPoints { indices: vec![57] })
        );
    }

    #[test]
    fn conflicting_duplicate_detected() {
        let s = sample_sweep();
        let mut frames = stream_sweep(&s, 7).unwrap();
        let mut tampered = frames[12];
        tampered.real += 1.0;
        frames.push(tampered);
        assert_eq!(
            assemble_sweep(&frames, s.grid()),
            Err(FrameError::ConflictingDuplicate { index: 12 })
        );
    }

    #[test]
    fn grid_mismatch_detected() {
        let s = sample_sweep();
        let mut frames = stream_sweep(&s, 7).unwrap();
        frames[40].frequency_hz *= 1.01;
        assert!(matches!(
            assemble_sweep(&frames, s.grid()),
            Err(FrameError::GridMismatch { index: 40, .. })
        ));
    }

    #[test]
    fn mixed_sweep_ids_rejected() {
        let s = sample_sweep();
        let mut frames = stream_sweep(&s, 7).unwrap();
        frames[3].sweep_id = 8;
        assert_eq!(
            assemble_sweep(&frames, s.grid()),
            Err(FrameError::MixedSweepIds(7, 8))
        );
    }

    #[test]
    fn oversized_sweep_rejected() {
        let grid = crate::spectrum::make_log_grid(1.0, 1e6, 257).unwrap();
        let values = vec![ComplexImpedance::new(1.0, 0.0); 257];
        let s = Spectrum::new(grid, values, SweepMeta::default()).unwrap();
        assert_eq!(stream_sweep(&s, 0), Err(FrameError::SweepTooLong(257)));
    }

    proptest! {
        #[test]
        fn encode_decode_round_trip(
            sweep_id in any::<u16>(),
            point_index in any::<u8>(),
            frequency_hz in 1e-3f32..1e9,
            real in -1e9f32..1e9,
            imag in -1e9f32..1e9,
        ) {
            let p = PointFrame { sweep_id, point_index, frequency_hz, real, imag };
            let decoded = decode_frame(&encode_frame(&p).unwrap()).unwrap();
            prop_assert_eq!(decoded, p);
        }
    }
}
