use super::huffman::HuffmanTable;
use super::{JpegImage, WRITABLE_MAX, ZIGZAG_TO_NATURAL};
use crate::error::{Error, Result};

/// Magnitude category: number of bits needed for `|v|`.
fn category(v: i32) -> u8 {
    (32 - v.unsigned_abs().leading_zeros()) as u8
}

/// One entropy-coding event of a block, in scan order.
enum Symbol {
    Dc { cat: u8, value: i32 },
    Ac { rs: u8, value: i32 },
}

fn block_symbols(image: &JpegImage, mut visit: impl FnMut(Symbol)) -> Result<()> {
    let wide = image.coeffs.blocks_wide();
    let mut pred = 0i32;
    for (index, block) in image.coeffs.blocks().iter().enumerate() {
        let out_of_range = |value: i32, mode: usize| Error::CoefficientOutOfRange {
            value,
            block_row: index / wide,
            block_col: index % wide,
            mode,
        };
        let dc = block[0] as i32;
        let diff = dc - pred;
        pred = dc;
        if diff.abs() > WRITABLE_MAX as i32 {
            return Err(out_of_range(dc, 0));
        }
        visit(Symbol::Dc {
            cat: category(diff),
            value: diff,
        });

        let mut run = 0u8;
        for &natural in ZIGZAG_TO_NATURAL.iter().skip(1) {
            let v = block[natural] as i32;
            if v == 0 {
                run += 1;
                continue;
            }
            if v.abs() > WRITABLE_MAX as i32 {
                return Err(out_of_range(v, natural));
            }
            while run >= 16 {
                visit(Symbol::Ac { rs: 0xF0, value: 0 });
                run -= 16;
            }
            visit(Symbol::Ac {
                rs: (run << 4) | category(v),
                value: v,
            });
            run = 0;
        }
        if run > 0 {
            visit(Symbol::Ac { rs: 0x00, value: 0 });
        }
    }
    Ok(())
}

struct BitWriter {
    out: Vec<u8>,
    acc: u32,
    n: u8,
}

impl BitWriter {
    fn put(&mut self, code: u32, len: u8) {
        for i in (0..len).rev() {
            self.acc = (self.acc << 1) | ((code >> i) & 1);
            self.n += 1;
            if self.n == 8 {
                let byte = self.acc as u8;
                self.out.push(byte);
                if byte == 0xFF {
                    self.out.push(0x00);
                }
                self.acc = 0;
                self.n = 0;
            }
        }
    }

    fn flush(&mut self) {
        if self.n > 0 {
            let pad = 8 - self.n;
            self.put((1 << pad) - 1, pad);
        }
    }
}

fn segment(out: &mut Vec<u8>, marker: u8, body: &[u8]) {
    out.extend_from_slice(&[0xFF, marker]);
    out.extend_from_slice(&((body.len() + 2) as u16).to_be_bytes());
    out.extend_from_slice(body);
}

fn dht_body(class_id: u8, table: &HuffmanTable) -> Vec<u8> {
    let mut body = vec![class_id];
    body.extend_from_slice(&table.counts);
    body.extend_from_slice(&table.symbols);
    body
}

/// Writes a baseline JPEG with Huffman tables regenerated for these coefficients.
///
/// Quantization tables with steps above 255 need 16-bit DQT entries, which
/// baseline forbids; those images are written as extended sequential (SOF1).
pub fn serialize_jpeg(image: &JpegImage) -> Result<Vec<u8>> {
    image.validate()?;
    if image.width > u16::MAX as u32 || image.height > u16::MAX as u32 {
        return Err(Error::InvalidImage("dimensions exceed 65535".into()));
    }

    let mut dc_freq = [0u32; 256];
    let mut ac_freq = [0u32; 256];
    block_symbols(image, |s| match s {
        Symbol::Dc { cat, .. } => dc_freq[cat as usize] += 1,
        Symbol::Ac { rs, .. } => ac_freq[rs as usize] += 1,
    })?;
    let dc_table = HuffmanTable::optimal(&dc_freq);
    let ac_table = HuffmanTable::optimal(&ac_freq);
    let dc_codes = dc_table.encoder();
    let ac_codes = ac_table.encoder();

    let mut out = vec![0xFF, 0xD8];
    segment(&mut out, 0xE0, b"JFIF\0\x01\x01\x00\x00\x01\x00\x01\x00\x00");

    let steps = image.quant_table.steps();
    let wide_steps = steps.iter().any(|&q| q > 255);
    let mut dqt = vec![if wide_steps { 0x10 } else { 0x00 }];
    for &natural in ZIGZAG_TO_NATURAL.iter() {
        if wide_steps {
            dqt.extend_from_slice(&steps[natural].to_be_bytes());
        } else {
            dqt.push(steps[natural] as u8);
        }
    }
    segment(&mut out, 0xDB, &dqt);

    let mut sof = vec![8];
    sof.extend_from_slice(&(image.height as u16).to_be_bytes());
    sof.extend_from_slice(&(image.width as u16).to_be_bytes());
    sof.extend_from_slice(&[1, 1, 0x11, 0]);
    segment(&mut out, if wide_steps { 0xC1 } else { 0xC0 }, &sof);

    segment(&mut out, 0xC4, &dht_body(0x00, &dc_table));
    segment(&mut out, 0xC4, &dht_body(0x10, &ac_table));
    segment(&mut out, 0xDA, &[1, 1, 0x00, 0, 63, 0]);

    let mut writer = BitWriter { out, acc: 0, n: 0 };
    block_symbols(image, |s| {
        let (code, len, cat, value) = match s {
            Symbol::Dc { cat, value } => {
                let (code, len) = dc_codes[cat as usize];
                (code, len, cat, value)
            }
            Symbol::Ac { rs, value } => {
                let (code, len) = ac_codes[rs as usize];
                (code, len, rs & 0x0F, value)
            }
        };
        writer.put(code as u32, len);
        if cat > 0 {
            let bits = if value < 0 { value - 1 } else { value } as u32;
            writer.put(bits & ((1 << cat) - 1), cat);
        }
    })?;
    writer.flush();
    let mut out = writer.out;
    out.extend_from_slice(&[0xFF, 0xD9]);
    Ok(out)
}
