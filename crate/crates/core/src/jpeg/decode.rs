use super::huffman::{HuffmanDecoder, HuffmanTable};
use super::{JpegImage, QuantTable, COEFF_MAX, COEFF_MIN, ZIGZAG_TO_NATURAL};
use crate::error::{Error, Result};
use crate::grid::BlockGrid;

const SOI: u8 = 0xD8;
const EOI: u8 = 0xD9;
const SOS: u8 = 0xDA;
const DQT: u8 = 0xDB;
const DNL: u8 = 0xDC;
const DRI: u8 = 0xDD;
const DHT: u8 = 0xC4;
const DAC: u8 = 0xCC;

struct Frame {
    width: u32,
    height: u32,
    component_id: u8,
    quant_id: usize,
}

/// Parses a baseline grayscale JPEG into its quantized coefficients.
pub fn parse_jpeg(bytes: &[u8]) -> Result<JpegImage> {
    if bytes.len() < 2 || bytes[0] != 0xFF || bytes[1] != SOI {
        return Err(Error::MalformedMarker("missing SOI".into()));
    }
    let mut pos = 2;
    let mut quant: [Option<[u16; 64]>; 4] = [None; 4];
    let mut dc_tables: [Option<HuffmanTable>; 4] = Default::default();
    let mut ac_tables: [Option<HuffmanTable>; 4] = Default::default();
    let mut frame: Option<Frame> = None;
    let mut restart_interval = 0u16;

    loop {
        let marker = next_marker(bytes, &mut pos)?;
        match marker {
            SOI => return Err(Error::MalformedMarker("repeated SOI".into())),
            EOI => return Err(Error::MalformedMarker("EOI before SOS".into())),
            0xD0..=0xD7 => return Err(Error::MalformedMarker("RST outside scan".into())),
            0x01 => continue,
            _ => {}
        }
        let segment = read_segment(bytes, &mut pos)?;
        match marker {
            DQT => parse_dqt(segment, &mut quant)?,
            DHT => parse_dht(segment, &mut dc_tables, &mut ac_tables)?,
            DRI => {
                if segment.len() != 2 {
                    return Err(Error::MalformedMarker("DRI length".into()));
                }
                restart_interval = u16::from_be_bytes([segment[0], segment[1]]);
            }
            0xC0 | 0xC1 => {
                if frame.is_some() {
                    return Err(Error::MalformedMarker("multiple SOF".into()));
                }
                frame = Some(parse_sof(segment)?);
            }
            0xC2 => return Err(Error::UnsupportedFeature("progressive DCT (SOF2)".into())),
            0xC3 => return Err(Error::UnsupportedFeature("lossless JPEG (SOF3)".into())),
            0xC5..=0xC7 => return Err(Error::UnsupportedFeature("hierarchical JPEG".into())),
            0xC8 => return Err(Error::UnsupportedFeature("JPG extension (SOF8)".into())),
            0xC9..=0xCB | 0xCD..=0xCF | DAC => {
                return Err(Error::UnsupportedFeature("arithmetic coding".into()))
            }
            DNL => return Err(Error::UnsupportedFeature("DNL marker".into())),
            SOS => {
                let frame = frame.ok_or_else(|| Error::MalformedMarker("SOS before SOF".into()))?;
                let (dc_id, ac_id) = parse_sos(segment, &frame)?;
                let q = quant[frame.quant_id]
                    .ok_or_else(|| Error::MalformedMarker("missing DQT for component".into()))?;
                let quant_table = QuantTable::new(q)?;
                let dc = dc_tables[dc_id]
                    .take()
                    .ok_or_else(|| Error::MalformedMarker("missing DC DHT".into()))?;
                let ac = ac_tables[ac_id]
                    .take()
                    .ok_or_else(|| Error::MalformedMarker("missing AC DHT".into()))?;
                let coeffs = decode_scan(&bytes[pos..], &frame, &dc, &ac, restart_interval)?;
                return Ok(JpegImage {
                    width: frame.width,
                    height: frame.height,
                    quant_table,
                    coeffs,
                    dc_table: Some(dc),
                    ac_table: Some(ac),
                    restart_interval,
                });
            }
            // APPn, COM and anything else with a length field is skipped.
            _ => {}
        }
    }
}

fn next_marker(bytes: &[u8], pos: &mut usize) -> Result<u8> {
    if *pos >= bytes.len() {
        return Err(Error::TruncatedStream("end of data while looking for a marker"));
    }
    if bytes[*pos] != 0xFF {
        return Err(Error::MalformedMarker(format!("expected marker at offset {}", *pos)));
    }
    while *pos < bytes.len() && bytes[*pos] == 0xFF {
        *pos += 1;
    }
    let marker = *bytes
        .get(*pos)
        .ok_or(Error::TruncatedStream("end of data inside marker"))?;
    *pos += 1;
    Ok(marker)
}

fn read_segment<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    if *pos + 2 > bytes.len() {
        return Err(Error::TruncatedStream("segment length"));
    }
    let len = u16::from_be_bytes([bytes[*pos], bytes[*pos + 1]]) as usize;
    if len < 2 {
        return Err(Error::MalformedMarker("segment length below 2".into()));
    }
    if *pos + len > bytes.len() {
        return Err(Error::TruncatedStream("segment body"));
    }
    let seg = &bytes[*pos + 2..*pos + len];
    *pos += len;
    Ok(seg)
}

fn parse_dqt(mut seg: &[u8], quant: &mut [Option<[u16; 64]>; 4]) -> Result<()> {
    while !seg.is_empty() {
        let precision = seg[0] >> 4;
        let id = (seg[0] & 0x0F) as usize;
        if id > 3 || precision > 1 {
            return Err(Error::MalformedMarker("DQT table id/precision".into()));
        }
        let entry = if precision == 0 { 1 } else { 2 };
        if seg.len() < 1 + 64 * entry {
            return Err(Error::MalformedMarker("DQT too short".into()));
        }
        let mut table = [0u16; 64];
        for (k, &natural) in ZIGZAG_TO_NATURAL.iter().enumerate() {
            table[natural] = if entry == 1 {
                seg[1 + k] as u16
            } else {
                u16::from_be_bytes([seg[1 + 2 * k], seg[2 + 2 * k]])
            };
        }
        quant[id] = Some(table);
        seg = &seg[1 + 64 * entry..];
    }
    Ok(())
}

fn parse_dht(
    mut seg: &[u8],
    dc: &mut [Option<HuffmanTable>; 4],
    ac: &mut [Option<HuffmanTable>; 4],
) -> Result<()> {
    while !seg.is_empty() {
        if seg.len() < 17 {
            return Err(Error::MalformedMarker("DHT too short".into()));
        }
        let class = seg[0] >> 4;
        let id = (seg[0] & 0x0F) as usize;
        if class > 1 || id > 3 {
            return Err(Error::MalformedMarker("DHT class/id".into()));
        }
        let mut counts = [0u8; 16];
        counts.copy_from_slice(&seg[1..17]);
        let total: usize = counts.iter().map(|&c| c as usize).sum();
        if seg.len() < 17 + total {
            return Err(Error::MalformedMarker("DHT symbols truncated".into()));
        }
        let table = HuffmanTable::new(counts, seg[17..17 + total].to_vec())?;
        if class == 0 {
            dc[id] = Some(table);
        } else {
            ac[id] = Some(table);
        }
        seg = &seg[17 + total..];
    }
    Ok(())
}

fn parse_sof(seg: &[u8]) -> Result<Frame> {
    if seg.len() < 6 {
        return Err(Error::MalformedMarker("SOF too short".into()));
    }
    let precision = seg[0];
    if precision != 8 {
        return Err(Error::UnsupportedFeature(format!("{precision}-bit samples")));
    }
    let height = u16::from_be_bytes([seg[1], seg[2]]) as u32;
    let width = u16::from_be_bytes([seg[3], seg[4]]) as u32;
    let components = seg[5];
    if components != 1 {
        return Err(Error::UnsupportedFeature(format!("{components} components (grayscale only)")));
    }
    if seg.len() != 6 + 3 {
        return Err(Error::MalformedMarker("SOF length".into()));
    }
    if height == 0 {
        return Err(Error::UnsupportedFeature("height defined by DNL".into()));
    }
    if width == 0 {
        return Err(Error::MalformedMarker("zero width".into()));
    }
    let quant_id = seg[8] as usize;
    if quant_id > 3 {
        return Err(Error::MalformedMarker("SOF quantization table id".into()));
    }
    Ok(Frame {
        width,
        height,
        component_id: seg[6],
        quant_id,
    })
}

fn parse_sos(seg: &[u8], frame: &Frame) -> Result<(usize, usize)> {
    if seg.is_empty() || seg[0] != 1 || seg.len() != 6 {
        return Err(Error::MalformedMarker("SOS must select exactly one component".into()));
    }
    if seg[1] != frame.component_id {
        return Err(Error::MalformedMarker("SOS component selector".into()));
    }
    let dc = (seg[2] >> 4) as usize;
    let ac = (seg[2] & 0x0F) as usize;
    if dc > 3 || ac > 3 {
        return Err(Error::MalformedMarker("SOS table selector".into()));
    }
    if seg[3] != 0 || seg[4] != 63 || seg[5] != 0 {
        return Err(Error::MalformedMarker("SOS spectral selection must be 0..63".into()));
    }
    Ok((dc, ac))
}

/// Bit reader over entropy-coded data: undoes 0xFF00 stuffing and stops at markers.
struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
    byte: u8,
    bits_left: u8,
}

impl<'a> BitReader<'a> {
    fn new(data: &'a [u8]) -> Self {
        Self {
            data,
            pos: 0,
            byte: 0,
            bits_left: 0,
        }
    }

    fn bit(&mut self) -> Result<u32> {
        if self.bits_left == 0 {
            let b = *self
                .data
                .get(self.pos)
                .ok_or(Error::TruncatedStream("entropy-coded data ended early"))?;
            if b == 0xFF {
                match self.data.get(self.pos + 1) {
                    Some(0x00) => self.pos += 2,
                    Some(_) => return Err(Error::TruncatedStream("marker inside entropy-coded data")),
                    None => return Err(Error::TruncatedStream("entropy-coded data ended early")),
                }
            } else {
                self.pos += 1;
            }
            self.byte = b;
            self.bits_left = 8;
        }
        self.bits_left -= 1;
        Ok(((self.byte >> self.bits_left) & 1) as u32)
    }

    fn bits(&mut self, n: u8) -> Result<u32> {
        let mut v = 0;
        for _ in 0..n {
            v = (v << 1) | self.bit()?;
        }
        Ok(v)
    }

    /// Discards the partial byte and consumes an RSTn marker.
    fn restart(&mut self, expected: u8) -> Result<()> {
        self.bits_left = 0;
        if self.pos >= self.data.len() || self.data[self.pos] != 0xFF {
            return Err(Error::MalformedMarker("expected RST marker".into()));
        }
        while self.pos < self.data.len() && self.data[self.pos] == 0xFF {
            self.pos += 1;
        }
        match self.data.get(self.pos) {
            Some(&m) if m == 0xD0 + expected => {
                self.pos += 1;
                Ok(())
            }
            Some(_) => Err(Error::MalformedMarker("wrong RST marker".into())),
            None => Err(Error::TruncatedStream("end of data at restart")),
        }
    }
}

/// Sign-extends an `s`-bit magnitude category value (T.81 F.2.2.1 EXTEND).
fn extend(v: u32, s: u8) -> i32 {
    if s == 0 {
        0
    } else if v < (1 << (s - 1)) {
        v as i32 - (1 << s) + 1
    } else {
        v as i32
    }
}

fn decode_scan(
    data: &[u8],
    frame: &Frame,
    dc: &HuffmanTable,
    ac: &HuffmanTable,
    restart_interval: u16,
) -> Result<BlockGrid<i16>> {
    let (rows, cols) = JpegImage::grid_dims(frame.width, frame.height);
    let total = rows * cols;
    // Every block costs at least two code bits, which bounds the allocation
    // by the size of the input.
    if total > data.len().saturating_mul(4) {
        return Err(Error::TruncatedStream("too little entropy-coded data for the frame size"));
    }
    let dc_dec = HuffmanDecoder::new(dc);
    let ac_dec = HuffmanDecoder::new(ac);
    let mut reader = BitReader::new(data);
    let mut blocks = Vec::with_capacity(total);
    let mut pred = 0i32;
    let mut next_rst = 0u8;

    for index in 0..total {
        if restart_interval > 0 && index > 0 && index % restart_interval as usize == 0 {
            reader.restart(next_rst)?;
            next_rst = (next_rst + 1) & 7;
            pred = 0;
        }
        let mut block = [0i16; 64];
        let t = dc_dec.decode(|| reader.bit())?;
        if t > 11 {
            return Err(Error::InvalidHuffmanCode("DC difference category above 11"));
        }
        let diff = extend(reader.bits(t)?, t);
        pred += diff;
        block[0] = checked(pred)?;

        let mut k = 1;
        while k < 64 {
            let rs = ac_dec.decode(|| reader.bit())?;
            let run = (rs >> 4) as usize;
            let size = rs & 0x0F;
            if size == 0 {
                if run == 15 {
                    k += 16;
                    continue;
                }
                break;
            }
            k += run;
            if k > 63 {
                return Err(Error::InvalidHuffmanCode("AC run past end of block"));
            }
            let v = extend(reader.bits(size)?, size);
            block[ZIGZAG_TO_NATURAL[k]] = checked(v)?;
            k += 1;
        }
        if k > 64 {
            return Err(Error::InvalidHuffmanCode("ZRL run past end of block"));
        }
        blocks.push(block);
    }
    Ok(BlockGrid::from_blocks(rows, cols, blocks).expect("block count matches grid"))
}

fn checked(v: i32) -> Result<i16> {
    if (COEFF_MIN as i32..=COEFF_MAX as i32).contains(&v) {
        Ok(v as i16)
    } else {
        Err(Error::InvalidImage(format!("decoded coefficient {v} outside 12-bit range")))
    }
}
