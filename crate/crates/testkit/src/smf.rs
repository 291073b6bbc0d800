//! Standalone Standard MIDI File reader (formats 0 and 1, running status,
//! meta and sysex events).

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmfEvent {
    pub tick: u64,
    pub track: usize,
    pub kind: SmfKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SmfKind {
    /// Status byte with channel, and the data bytes.
    Channel { status: u8, data: Vec<u8> },
    Meta { kind: u8, data: Vec<u8> },
    SysEx(Vec<u8>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Smf {
    pub format: u16,
    pub division: u16,
    pub events: Vec<SmfEvent>,
}

impl Smf {
    pub fn tempo(&self) -> Option<u32> {
        self.events.iter().find_map(|e| match &e.kind {
            SmfKind::Meta { kind: 0x51, data } if data.len() == 3 => {
                Some(u32::from_be_bytes([0, data[0], data[1], data[2]]))
            }
            _ => None,
        })
    }

    /// Channel events as `(tick, status, data)`.
    pub fn channel_events(&self) -> Vec<(u64, u8, Vec<u8>)> {
        self.events
            .iter()
            .filter_map(|e| match &e.kind {
                SmfKind::Channel { status, data } => Some((e.tick, *status, data.clone())),
                _ => None,
            })
            .collect()
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or("unexpected end of data")?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, String> {
        Ok(self.take(1)?[0])
    }

    fn be(&mut self, n: usize) -> Result<u32, String> {
        Ok(self.take(n)?.iter().fold(0u32, |acc, b| (acc << 8) | u32::from(*b)))
    }

    fn vlq(&mut self) -> Result<u32, String> {
        let mut value = 0u32;
        for i in 0..4 {
            let b = self.u8()?;
            value = (value << 7) | u32::from(b & 0x7F);
            if b & 0x80 == 0 {
                return Ok(value);
            }
            if i == 3 {
                break;
            }
        }
        Err("variable-length quantity longer than 4 bytes".into())
    }
}

/// Decode a single variable-length quantity, returning it and its length.
pub fn read_vlq(bytes: &[u8]) -> Result<(u32, usize), String> {
    let mut r = Reader { bytes, pos: 0 };
    let v = r.vlq()?;
    Ok((v, r.pos))
}

fn data_len(status: u8) -> usize {
    match status & 0xF0 {
        0xC0 | 0xD0 => 1,
        _ => 2,
    }
}

pub fn parse(bytes: &[u8]) -> Result<Smf, String> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != b"MThd" {
        return Err("missing MThd".into());
    }
    let header_len = r.be(4)? as usize;
    if header_len < 6 {
        return Err("short header".into());
    }
    let format = r.be(2)? as u16;
    let tracks = r.be(2)? as usize;
    let division = r.be(2)? as u16;
    r.take(header_len - 6)?;

    let mut events = Vec::new();
    for track in 0..tracks {
        if r.take(4)? != b"MTrk" {
            return Err(format!("track {track}: missing MTrk"));
        }
        let len = r.be(4)? as usize;
        let body = r.take(len)?;
        let mut t = Reader { bytes: body, pos: 0 };
        let mut tick = 0u64;
        let mut running: Option<u8> = None;
        let mut ended = false;
        while t.pos < body.len() {
            if ended {
                return Err(format!("track {track}: data after End-of-Track"));
            }
            tick += u64::from(t.vlq()?);
            let first = t.u8()?;
            let kind = match first {
                0xFF => {
                    let kind = t.u8()?;
                    let n = t.vlq()? as usize;
                    let data = t.take(n)?.to_vec();
                    if kind == 0x2F {
                        ended = true;
                    }
                    running = None;
                    SmfKind::Meta { kind, data }
                }
                0xF0 | 0xF7 => {
                    let n = t.vlq()? as usize;
                    running = None;
                    SmfKind::SysEx(t.take(n)?.to_vec())
                }
                s if s & 0x80 != 0 => {
                    running = Some(s);
                    SmfKind::Channel { status: s, data: t.take(data_len(s))?.to_vec() }
                }
                d => {
                    let s = running.ok_or(format!("track {track}: data byte {d:#x} without running status"))?;
                    let mut data = vec![d];
                    data.extend_from_slice(t.take(data_len(s) - 1)?);
                    SmfKind::Channel { status: s, data }
                }
            };
            events.push(SmfEvent { tick, track, kind });
        }
        if !ended {
            return Err(format!("track {track}: missing End-of-Track"));
        }
    }
    if r.pos != bytes.len() {
        return Err("trailing bytes after last track".into());
    }
    Ok(Smf { format, division, events })
}
