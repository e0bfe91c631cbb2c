use crate::error::{Error, Result};

/// A Huffman table in DHT form: how many codes of each length 1..=16, and the
/// symbols in code order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HuffmanTable {
    pub counts: [u8; 16],
    pub symbols: Vec<u8>,
}

impl HuffmanTable {
    pub fn new(counts: [u8; 16], symbols: Vec<u8>) -> Result<Self> {
        let total: usize = counts.iter().map(|&c| c as usize).sum();
        if total != symbols.len() || total > 256 {
            return Err(Error::MalformedMarker("DHT symbol count mismatch".into()));
        }
        // Canonical codes must fit in their lengths.
        let mut code: u32 = 0;
        for (i, &n) in counts.iter().enumerate() {
            code += n as u32;
            if code > 1 << (i + 1) {
                return Err(Error::MalformedMarker("DHT code lengths overflow".into()));
            }
            code <<= 1;
        }
        Ok(Self { counts, symbols })
    }

    /// Canonical code and length per symbol (length 0 = symbol absent).
    pub(crate) fn encoder(&self) -> [(u16, u8); 256] {
        let mut table = [(0u16, 0u8); 256];
        let mut code: u32 = 0;
        let mut k = 0;
        for (i, &n) in self.counts.iter().enumerate() {
            for _ in 0..n {
                table[self.symbols[k] as usize] = (code as u16, i as u8 + 1);
                code += 1;
                k += 1;
            }
            code <<= 1;
        }
        table
    }

    /// Builds a length-limited optimal table for the given symbol frequencies
    /// using the procedure of ITU-T T.81 Annex K.2.
    pub(crate) fn optimal(freq: &[u32; 256]) -> Self {
        // Slot 256 is a reserved pseudo-symbol so no real code is all ones.
        let mut freq: Vec<u64> = freq.iter().map(|&f| f as u64).collect();
        freq.push(1);
        let mut codesize = [0usize; 257];
        let mut others = [-1i32; 257];

        loop {
            // c1: least frequent symbol, c2: next least; ties go to the larger index.
            let mut c1: Option<usize> = None;
            for i in 0..257 {
                if freq[i] > 0 && c1.is_none_or(|c| freq[i] <= freq[c]) {
                    c1 = Some(i);
                }
            }
            let mut c2: Option<usize> = None;
            for i in 0..257 {
                if freq[i] > 0 && Some(i) != c1 && c2.is_none_or(|c| freq[i] <= freq[c]) {
                    c2 = Some(i);
                }
            }
            let (Some(mut c1), Some(mut c2)) = (c1, c2) else {
                break;
            };
            freq[c1] += freq[c2];
            freq[c2] = 0;
            codesize[c1] += 1;
            while others[c1] >= 0 {
                c1 = others[c1] as usize;
                codesize[c1] += 1;
            }
            others[c1] = c2 as i32;
            codesize[c2] += 1;
            while others[c2] >= 0 {
                c2 = others[c2] as usize;
                codesize[c2] += 1;
            }
        }

        let mut bits = [0u32; 33];
        for &size in codesize.iter() {
            if size > 0 {
                bits[size.min(32)] += 1;
            }
        }
        // Limit code lengths to 16 bits.
        let mut i = 32;
        while i > 16 {
            while bits[i] > 0 {
                let mut j = i - 2;
                while bits[j] == 0 {
                    j -= 1;
                }
                bits[i] -= 2;
                bits[i - 1] += 1;
                bits[j + 1] += 2;
                bits[j] -= 1;
            }
            i -= 1;
        }
        // Drop the reserved pseudo-symbol from the longest length.
        while bits[i] == 0 {
            i -= 1;
        }
        bits[i] -= 1;

        let mut counts = [0u8; 16];
        for (len, count) in counts.iter_mut().enumerate() {
            *count = bits[len + 1] as u8;
        }
        let mut symbols = Vec::new();
        for size in 1..=32 {
            for (sym, &cs) in codesize.iter().enumerate().take(256) {
                if cs == size {
                    symbols.push(sym as u8);
                }
            }
        }
        Self { counts, symbols }
    }
}

/// Decoding form of a Huffman table (T.81 Annex F.2.2.3).
pub(crate) struct HuffmanDecoder {
    maxcode: [i32; 18],
    valptr: [i32; 17],
    mincode: [i32; 17],
    symbols: Vec<u8>,
}

impl HuffmanDecoder {
    pub(crate) fn new(table: &HuffmanTable) -> Self {
        let mut maxcode = [-1i32; 18];
        let mut valptr = [0i32; 17];
        let mut mincode = [0i32; 17];
        let mut code = 0i32;
        let mut k = 0i32;
        for len in 1..=16 {
            let n = table.counts[len - 1] as i32;
            if n > 0 {
                valptr[len] = k;
                mincode[len] = code;
                code += n;
                k += n;
                maxcode[len] = code - 1;
            }
            code <<= 1;
        }
        maxcode[17] = i32::MAX;
        Self {
            maxcode,
            valptr,
            mincode,
            symbols: table.symbols.clone(),
        }
    }

    pub(crate) fn decode(&self, mut next_bit: impl FnMut() -> Result<u32>) -> Result<u8> {
        let mut code = next_bit()? as i32;
        let mut len = 1;
        while code > self.maxcode[len] {
            len += 1;
            if len > 16 {
                return Err(Error::InvalidHuffmanCode("no code of length <= 16 matches"));
            }
            code = (code << 1) | next_bit()? as i32;
        }
        let idx = (self.valptr[len] + code - self.mincode[len]) as usize;
        self.symbols
            .get(idx)
            .copied()
            .ok_or(Error::InvalidHuffmanCode("code maps past symbol list"))
    }
}
