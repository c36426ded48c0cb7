//! Baseline-sequential JPEG decoder that stops at the coefficient level.
//!
//! Quantized DCT coefficients are read straight from the Huffman-coded
//! entropy segment, with DC differences resolved, and never dequantized or
//! inverse-transformed. Non-baseline streams (progressive, arithmetic,
//! 12-bit, 16-bit quant tables) are rejected so the caller can route them
//! through the pixel re-encode fallback.

use std::io::Cursor;

use thiserror::Error;

/// Natural-order index of the k-th coefficient in zigzag scan order.
const UNZIGZAG: [usize; 64] = [
    0, 1, 8, 16, 9, 2, 3, 10, 17, 24, 32, 25, 18, 11, 4, 5, 12, 19, 26, 33, 40, 48, 41, 34, 27,
    20, 13, 6, 7, 14, 21, 28, 35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51, 58,
    59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
];

#[derive(Debug, Error)]
pub enum JpegError {
    #[error("not a JPEG stream")]
    NotAJpeg,
    #[error("unsupported JPEG coding process (not baseline sequential Huffman)")]
    ProgressiveUnsupported,
    #[error("corrupt JPEG stream at byte offset {offset}: {what}")]
    CorruptStream { offset: usize, what: &'static str },
}

fn corrupt(offset: usize, what: &'static str) -> JpegError {
    JpegError::CorruptStream { offset, what }
}

/// Quantized luminance DCT coefficients of one image, plus the luminance
/// quantization table (natural order) from the DQT segment.
#[derive(Debug, Clone)]
pub struct DctPlane {
    blocks: Vec<[i32; 64]>,
    blocks_w: usize,
    blocks_h: usize,
    pub quant_table: [u16; 64],
    /// Luma plane dimensions in pixels, padded up to multiples of 8.
    pub dims: (u32, u32),
}

impl DctPlane {
    pub fn blocks_w(&self) -> usize {
        self.blocks_w
    }

    pub fn blocks_h(&self) -> usize {
        self.blocks_h
    }

    /// Block at grid position (bx, by); coefficients in natural order, DC at 0.
    pub fn block(&self, bx: usize, by: usize) -> &[i32; 64] {
        &self.blocks[by * self.blocks_w + bx]
    }

    /// The 8-aligned `side x side` pixel window starting at (x, y), as a
    /// row-major list of its blocks. `None` if unaligned or out of bounds.
    pub fn block_subgrid(&self, x: u32, y: u32, side: u32) -> Option<Vec<[i32; 64]>> {
        if x % 8 != 0 || y % 8 != 0 || side % 8 != 0 {
            return None;
        }
        let (bx, by, n) = ((x / 8) as usize, (y / 8) as usize, (side / 8) as usize);
        if bx + n > self.blocks_w || by + n > self.blocks_h {
            return None;
        }
        let mut out = Vec::with_capacity(n * n);
        for row in by..by + n {
            for col in bx..bx + n {
                out.push(*self.block(col, row));
            }
        }
        Some(out)
    }
}

struct HuffTable {
    mincode: [i32; 17],
    maxcode: [i32; 17],
    valptr: [i32; 17],
    values: Vec<u8>,
}

impl HuffTable {
    fn build(counts: &[u8; 16], values: Vec<u8>, offset: usize) -> Result<Self, JpegError> {
        let total: usize = counts.iter().map(|&c| c as usize).sum();
        if total == 0 || total > 256 || values.len() != total {
            return Err(corrupt(offset, "invalid Huffman table spec"));
        }
        let mut mincode = [0i32; 17];
        let mut maxcode = [-1i32; 17];
        let mut valptr = [0i32; 17];
        let mut code = 0i32;
        let mut k = 0usize;
        for l in 1..=16 {
            let n = counts[l - 1] as i32;
            if n > 0 {
                valptr[l] = k as i32;
                mincode[l] = code;
                code += n;
                maxcode[l] = code - 1;
                k += n as usize;
            }
            if code > (1 << l) {
                return Err(corrupt(offset, "overfull Huffman code"));
            }
            code <<= 1;
        }
        Ok(Self { mincode, maxcode, valptr, values })
    }

    fn decode(&self, r: &mut BitReader) -> Result<u8, JpegError> {
        let mut code = r.next_bit()? as i32;
        let mut l = 1usize;
        while code > self.maxcode[l] {
            if l == 16 {
                return Err(corrupt(r.byte_pos(), "invalid Huffman code"));
            }
            code = (code << 1) | r.next_bit()? as i32;
            l += 1;
        }
        let idx = (self.valptr[l] + code - self.mincode[l]) as usize;
        self.values
            .get(idx)
            .copied()
            .ok_or_else(|| corrupt(r.byte_pos(), "Huffman code out of table range"))
    }
}

/// MSB-first bit reader over the entropy-coded segment. 0xFF00 byte stuffing
/// is resolved here; any other marker inside the segment is an error.
struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
    buf: u32,
    count: u32,
}

impl<'a> BitReader<'a> {
    fn new(data: &'a [u8], pos: usize) -> Self {
        Self { data, pos, buf: 0, count: 0 }
    }

    fn byte_pos(&self) -> usize {
        self.pos
    }

    fn next_bit(&mut self) -> Result<u32, JpegError> {
        if self.count == 0 {
            if self.pos >= self.data.len() {
                return Err(corrupt(self.pos, "entropy data truncated"));
            }
            let mut b = self.data[self.pos];
            if b == 0xFF {
                match self.data.get(self.pos + 1) {
                    Some(0x00) => {
                        self.pos += 2;
                        b = 0xFF;
                    }
                    _ => return Err(corrupt(self.pos, "marker inside entropy-coded segment")),
                }
            } else {
                self.pos += 1;
            }
            self.buf = b as u32;
            self.count = 8;
        }
        self.count -= 1;
        Ok((self.buf >> self.count) & 1)
    }

    fn receive(&mut self, s: u8) -> Result<i32, JpegError> {
        debug_assert!(s <= 16);
        let mut v = 0i32;
        for _ in 0..s {
            v = (v << 1) | self.next_bit()? as i32;
        }
        Ok(v)
    }

    /// Drop partial bits and consume the expected RSTn marker.
    fn read_restart(&mut self, n: u8) -> Result<(), JpegError> {
        self.count = 0;
        let start = self.pos;
        let mut p = self.pos;
        while p + 1 < self.data.len() && self.data[p] == 0xFF && self.data[p + 1] == 0xFF {
            p += 1; // fill bytes
        }
        if p + 1 < self.data.len() && self.data[p] == 0xFF && self.data[p + 1] == 0xD0 + n {
            self.pos = p + 2;
            Ok(())
        } else {
            Err(corrupt(start, "expected restart marker"))
        }
    }
}

fn extend(v: i32, s: u8) -> i32 {
    if s == 0 {
        0
    } else if v < (1 << (s - 1)) {
        v - (1 << s) + 1
    } else {
        v
    }
}

struct Component {
    id: u8,
    h: usize,
    v: usize,
    tq: usize,
    /// True block grid of this component: ceil(comp_px / 8).
    blocks_w: usize,
    blocks_h: usize,
    /// MCU-padded grid the scan writes into.
    grid_w: usize,
    grid_h: usize,
    blocks: Vec<[i32; 64]>,
    done: bool,
}

struct Frame {
    comps: Vec<Component>,
    mcus_x: usize,
    mcus_y: usize,
}

struct ScanComp {
    comp_idx: usize,
    dc_table: usize,
    ac_table: usize,
}

struct Decoder<'a> {
    data: &'a [u8],
    qtables: [Option<[u16; 64]>; 4],
    dc: [Option<HuffTable>; 4],
    ac: [Option<HuffTable>; 4],
    frame: Option<Frame>,
    restart_interval: usize,
}

/// Read quantized luminance DCT coefficients and the luminance quantization
/// table from a baseline sequential JPEG stream.
pub fn decode_jpeg_dct(bytes: &[u8]) -> Result<DctPlane, JpegError> {
    if bytes.len() < 2 || bytes[0] != 0xFF || bytes[1] != 0xD8 {
        return Err(JpegError::NotAJpeg);
    }
    let mut dec = Decoder {
        data: bytes,
        qtables: [None, None, None, None],
        dc: [None, None, None, None],
        ac: [None, None, None, None],
        frame: None,
        restart_interval: 0,
    };
    dec.run()
}

impl<'a> Decoder<'a> {
    fn u16_at(&self, pos: usize) -> Result<u16, JpegError> {
        if pos + 1 >= self.data.len() {
            return Err(corrupt(pos, "unexpected end of stream"));
        }
        Ok(((self.data[pos] as u16) << 8) | self.data[pos + 1] as u16)
    }

    fn segment(&self, pos: usize) -> Result<(&'a [u8], usize), JpegError> {
        let len = self.u16_at(pos)? as usize;
        if len < 2 || pos + len > self.data.len() {
            return Err(corrupt(pos, "segment length out of bounds"));
        }
        Ok((&self.data[pos + 2..pos + len], pos + len))
    }

    fn run(&mut self) -> Result<DctPlane, JpegError> {
        let mut pos = 2usize;
        loop {
            // markers may be preceded by fill bytes
            while pos < self.data.len() && self.data[pos] == 0xFF && matches!(self.data.get(pos + 1), Some(0xFF)) {
                pos += 1;
            }
            if pos + 1 >= self.data.len() {
                return Err(corrupt(pos, "missing marker"));
            }
            if self.data[pos] != 0xFF {
                return Err(corrupt(pos, "expected marker"));
            }
            let code = self.data[pos + 1];
            pos += 2;
            match code {
                0xD9 => return Err(corrupt(pos - 2, "end of image before full scan data")),
                0x01 | 0xD0..=0xD7 => {} // standalone, nothing to skip
                0xC0 | 0xC1 => pos = self.parse_sof(pos)?,
                // every other start-of-frame flavor needs the re-encode path
                0xC2 | 0xC3 | 0xC5..=0xC7 | 0xC9..=0xCB | 0xCD..=0xCF | 0xCC => {
                    return Err(JpegError::ProgressiveUnsupported)
                }
                0xC4 => pos = self.parse_dht(pos)?,
                0xDB => pos = self.parse_dqt(pos)?,
                0xDD => {
                    let (seg, next) = self.segment(pos)?;
                    if seg.len() != 2 {
                        return Err(corrupt(pos, "bad DRI length"));
                    }
                    self.restart_interval = (((seg[0] as u16) << 8) | seg[1] as u16) as usize;
                    pos = next;
                }
                0xDA => {
                    pos = self.parse_sos_and_scan(pos)?;
                    let frame = self.frame.as_ref().expect("scan implies frame");
                    if frame.comps.iter().all(|c| c.done) {
                        return self.finish();
                    }
                }
                _ => {
                    // APPn, COM, DNL, and anything else with a length word
                    let (_, next) = self.segment(pos)?;
                    pos = next;
                }
            }
        }
    }

    fn parse_dqt(&mut self, pos: usize) -> Result<usize, JpegError> {
        let (seg, next) = self.segment(pos)?;
        let mut i = 0usize;
        while i < seg.len() {
            let pq = seg[i] >> 4;
            let tq = (seg[i] & 0x0F) as usize;
            if tq > 3 {
                return Err(corrupt(pos, "quantization table id out of range"));
            }
            if pq == 1 {
                // 16-bit tables are an extended-sequential feature
                return Err(JpegError::ProgressiveUnsupported);
            }
            if pq != 0 || i + 65 > seg.len() {
                return Err(corrupt(pos, "bad DQT entry"));
            }
            let mut table = [0u16; 64];
            for k in 0..64 {
                let q = seg[i + 1 + k] as u16;
                if q == 0 {
                    return Err(corrupt(pos, "zero quantization value"));
                }
                table[UNZIGZAG[k]] = q;
            }
            self.qtables[tq] = Some(table);
            i += 65;
        }
        Ok(next)
    }

    fn parse_dht(&mut self, pos: usize) -> Result<usize, JpegError> {
        let (seg, next) = self.segment(pos)?;
        let mut i = 0usize;
        while i < seg.len() {
            if i + 17 > seg.len() {
                return Err(corrupt(pos, "truncated DHT"));
            }
            let tc = seg[i] >> 4;
            let th = (seg[i] & 0x0F) as usize;
            if tc > 1 || th > 3 {
                return Err(corrupt(pos, "Huffman table class/id out of range"));
            }
            let mut counts = [0u8; 16];
            counts.copy_from_slice(&seg[i + 1..i + 17]);
            let total: usize = counts.iter().map(|&c| c as usize).sum();
            if i + 17 + total > seg.len() {
                return Err(corrupt(pos, "truncated DHT values"));
            }
            let values = seg[i + 17..i + 17 + total].to_vec();
            let table = HuffTable::build(&counts, values, pos)?;
            if tc == 0 {
                self.dc[th] = Some(table);
            } else {
                self.ac[th] = Some(table);
            }
            i += 17 + total;
        }
        Ok(next)
    }

    fn parse_sof(&mut self, pos: usize) -> Result<usize, JpegError> {
        if self.frame.is_some() {
            return Err(corrupt(pos, "multiple frames"));
        }
        let (seg, next) = self.segment(pos)?;
        if seg.len() < 6 {
            return Err(corrupt(pos, "truncated SOF"));
        }
        let precision = seg[0];
        if precision != 8 {
            return Err(JpegError::ProgressiveUnsupported);
        }
        let height = ((seg[1] as u32) << 8) | seg[2] as u32;
        let width = ((seg[3] as u32) << 8) | seg[4] as u32;
        if width == 0 || height == 0 {
            return Err(corrupt(pos, "zero frame dimensions"));
        }
        let nf = seg[5] as usize;
        if nf == 0 || nf > 4 || seg.len() < 6 + 3 * nf {
            return Err(corrupt(pos, "bad component count"));
        }
        let mut comps = Vec::with_capacity(nf);
        let (mut hmax, mut vmax) = (0usize, 0usize);
        for c in 0..nf {
            let b = &seg[6 + 3 * c..9 + 3 * c];
            let (h, v) = ((b[1] >> 4) as usize, (b[1] & 0x0F) as usize);
            if !(1..=4).contains(&h) || !(1..=4).contains(&v) {
                return Err(corrupt(pos, "bad sampling factors"));
            }
            hmax = hmax.max(h);
            vmax = vmax.max(v);
            comps.push((b[0], h, v, (b[2] & 0x0F) as usize));
        }
        let mcus_x = (width as usize).div_ceil(8 * hmax);
        let mcus_y = (height as usize).div_ceil(8 * vmax);
        let comps = comps
            .into_iter()
            .map(|(id, h, v, tq)| {
                let px_w = (width as usize * h).div_ceil(hmax);
                let px_h = (height as usize * v).div_ceil(vmax);
                let grid_w = mcus_x * h;
                let grid_h = mcus_y * v;
                Component {
                    id,
                    h,
                    v,
                    tq,
                    blocks_w: px_w.div_ceil(8),
                    blocks_h: px_h.div_ceil(8),
                    grid_w,
                    grid_h,
                    blocks: vec![[0i32; 64]; grid_w * grid_h],
                    done: false,
                }
            })
            .collect();
        self.frame = Some(Frame { comps, mcus_x, mcus_y });
        Ok(next)
    }

    fn parse_sos_and_scan(&mut self, pos: usize) -> Result<usize, JpegError> {
        let (seg, data_start) = self.segment(pos)?;
        let frame = self.frame.as_ref().ok_or_else(|| corrupt(pos, "scan before frame header"))?;
        if seg.is_empty() {
            return Err(corrupt(pos, "truncated SOS"));
        }
        let ns = seg[0] as usize;
        if ns == 0 || ns > frame.comps.len() || seg.len() != 1 + 2 * ns + 3 {
            return Err(corrupt(pos, "bad SOS header"));
        }
        let mut scan_comps = Vec::with_capacity(ns);
        for s in 0..ns {
            let cs = seg[1 + 2 * s];
            let tables = seg[2 + 2 * s];
            let comp_idx = frame
                .comps
                .iter()
                .position(|c| c.id == cs)
                .ok_or_else(|| corrupt(pos, "scan references unknown component"))?;
            scan_comps.push(ScanComp {
                comp_idx,
                dc_table: (tables >> 4) as usize,
                ac_table: (tables & 0x0F) as usize,
            });
        }
        let (ss, se, ahal) = (seg[1 + 2 * ns], seg[2 + 2 * ns], seg[3 + 2 * ns]);
        if ss != 0 || se != 63 || ahal != 0 {
            return Err(JpegError::ProgressiveUnsupported);
        }
        for sc in &scan_comps {
            if sc.dc_table > 3 || sc.ac_table > 3 {
                return Err(corrupt(pos, "Huffman table id out of range"));
            }
            if self.dc[sc.dc_table].is_none() || self.ac[sc.ac_table].is_none() {
                return Err(corrupt(pos, "scan references undefined Huffman table"));
            }
        }

        let mut reader = BitReader::new(self.data, data_start);
        self.decode_scan(&mut reader, &scan_comps)?;

        let frame = self.frame.as_mut().expect("frame checked above");
        for sc in &scan_comps {
            frame.comps[sc.comp_idx].done = true;
        }

        // resync to the next marker after the entropy-coded segment
        let mut p = reader.byte_pos();
        while p + 1 < self.data.len() {
            if self.data[p] == 0xFF && self.data[p + 1] != 0x00 {
                return Ok(p);
            }
            p += 1;
        }
        Ok(self.data.len().saturating_sub(2).max(p))
    }

    fn decode_scan(&mut self, reader: &mut BitReader, scan: &[ScanComp]) -> Result<(), JpegError> {
        let frame = self.frame.as_mut().expect("frame present");
        let mut preds = vec![0i32; scan.len()];
        let interval = self.restart_interval;
        let mut rst = 0u8;

        // Unit count: MCUs when interleaved, bare blocks for a single-component scan.
        let n_units = if scan.len() == 1 {
            let c = &frame.comps[scan[0].comp_idx];
            c.blocks_w * c.blocks_h
        } else {
            frame.mcus_x * frame.mcus_y
        };

        for unit in 0..n_units {
            if interval > 0 && unit > 0 && unit % interval == 0 {
                reader.read_restart(rst)?;
                rst = (rst + 1) % 8;
                preds.iter_mut().for_each(|p| *p = 0);
            }
            if scan.len() == 1 {
                let sc = &scan[0];
                let comp = &mut frame.comps[sc.comp_idx];
                let (bx, by) = (unit % comp.blocks_w, unit / comp.blocks_w);
                let block = decode_block(
                    reader,
                    self.dc[sc.dc_table].as_ref().unwrap(),
                    self.ac[sc.ac_table].as_ref().unwrap(),
                    &mut preds[0],
                )?;
                comp.blocks[by * comp.grid_w + bx] = block;
            } else {
                let (mx, my) = (unit % frame.mcus_x, unit / frame.mcus_x);
                for (si, sc) in scan.iter().enumerate() {
                    let comp = &mut frame.comps[sc.comp_idx];
                    for v in 0..comp.v {
                        for h in 0..comp.h {
                            let block = decode_block(
                                reader,
                                self.dc[sc.dc_table].as_ref().unwrap(),
                                self.ac[sc.ac_table].as_ref().unwrap(),
                                &mut preds[si],
                            )?;
                            let bx = mx * comp.h + h;
                            let by = my * comp.v + v;
                            comp.blocks[by * comp.grid_w + bx] = block;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<DctPlane, JpegError> {
        let frame = self.frame.as_mut().expect("frame present");
        let luma = &mut frame.comps[0];
        let qt = self.qtables[luma.tq].ok_or_else(|| corrupt(0, "missing quantization table"))?;
        // crop the MCU-padded grid down to the component's true block grid
        let mut blocks = Vec::with_capacity(luma.blocks_w * luma.blocks_h);
        for by in 0..luma.blocks_h {
            for bx in 0..luma.blocks_w {
                blocks.push(luma.blocks[by * luma.grid_w + bx]);
            }
        }
        Ok(DctPlane {
            blocks,
            blocks_w: luma.blocks_w,
            blocks_h: luma.blocks_h,
            quant_table: qt,
            dims: ((luma.blocks_w * 8) as u32, (luma.blocks_h * 8) as u32),
        })
    }
}

fn decode_block(
    reader: &mut BitReader,
    dc: &HuffTable,
    ac: &HuffTable,
    pred: &mut i32,
) -> Result<[i32; 64], JpegError> {
    let mut block = [0i32; 64];
    let s = dc.decode(reader)?;
    if s > 15 {
        return Err(corrupt(reader.byte_pos(), "DC magnitude category out of range"));
    }
    let diff = extend(reader.receive(s)?, s);
    *pred += diff;
    block[0] = *pred;

    let mut k = 1usize;
    while k < 64 {
        let rs = ac.decode(reader)?;
        let r = (rs >> 4) as usize;
        let s = rs & 0x0F;
        if s == 0 {
            if r == 15 {
                k += 16; // ZRL
                continue;
            }
            break; // EOB
        }
        k += r;
        if k > 63 {
            return Err(corrupt(reader.byte_pos(), "AC run exceeds block"));
        }
        block[UNZIGZAG[k]] = extend(reader.receive(s)?, s);
        k += 1;
    }
    Ok(block)
}

/// Decode coefficients, falling back to an in-memory baseline re-encode at
/// quality 90 for non-JPEG or non-baseline inputs. Returns the plane and
/// whether the fallback ran (provenance is lost when it does, so callers
/// record it in the run log).
pub fn decode_with_fallback(bytes: &[u8]) -> Result<(DctPlane, bool), JpegError> {
    match decode_jpeg_dct(bytes) {
        Ok(plane) => Ok((plane, false)),
        Err(err @ (JpegError::NotAJpeg | JpegError::ProgressiveUnsupported)) => {
            let img = image::load_from_memory(bytes).map_err(|_| err)?;
            let mut buf = Cursor::new(Vec::new());
            img.write_with_encoder(image::codecs::jpeg::JpegEncoder::new_with_quality(
                &mut buf, 90,
            ))
            .map_err(|_| JpegError::ProgressiveUnsupported)?;
            let plane = decode_jpeg_dct(buf.get_ref())?;
            Ok((plane, true))
        }
        Err(e) => Err(e),
    }
}
