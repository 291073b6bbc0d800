//! Minimal PLY reader (ascii and binary little-endian) and an ascii writer.
//!
//! Only the `x`, `y`, `z` properties of the `vertex` element are kept.
//! Every other element and property is parsed for framing and then dropped.

use std::fmt::Write as _;

use thiserror::Error;

use super::{Point3, PointCloud};

#[derive(Debug, Error, PartialEq)]
pub enum PlyError {
    #[error("malformed PLY header: {0}")]
    MalformedHeader(String),
    #[error("unsupported PLY format `{0}` (only ascii and binary_little_endian 1.0 are read)")]
    UnsupportedFormat(String),
    #[error("PLY file has no `vertex` element")]
    MissingVertexElement,
    #[error("vertex element has no float property `{0}`")]
    MissingCoordinate(&'static str),
    #[error("vertex property `{name}` has type `{ty}`; coordinates must be float32 or float64")]
    CoordinateType { name: String, ty: String },
    #[error("truncated PLY body: element `{element}` declares {expected} rows but only {found} are present")]
    TruncatedBody {
        element: String,
        expected: usize,
        found: usize,
    },
    #[error("invalid ascii value `{token}` in element `{element}`")]
    InvalidValue { element: String, token: String },
}

/// Result of a successful parse.
#[derive(Debug, Clone, PartialEq)]
pub struct PlyReport {
    pub cloud: PointCloud,
    /// Vertices dropped because a coordinate was NaN or infinite.
    pub dropped_non_finite: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn is_float(self) -> bool {
        matches!(self, Scalar::F32 | Scalar::F64)
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => f64::from(b[0] as i8),
            Scalar::U8 => f64::from(b[0]),
            Scalar::I16 => f64::from(i16::from_le_bytes([b[0], b[1]])),
            Scalar::U16 => f64::from(u16::from_le_bytes([b[0], b[1]])),
            Scalar::I32 => f64::from(i32::from_le_bytes([b[0], b[1], b[2], b[3]])),
            Scalar::U32 => f64::from(u32::from_le_bytes([b[0], b[1], b[2], b[3]])),
            Scalar::F32 => f64::from(f32::from_le_bytes([b[0], b[1], b[2], b[3]])),
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar { name: String, ty: Scalar },
    List { count: Scalar, item: Scalar },
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

struct Header {
    format: Format,
    elements: Vec<Element>,
    body_offset: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header, PlyError> {
    let malformed = |msg: &str| PlyError::MalformedHeader(msg.to_string());

    let mut offset = 0;
    let mut next_line = || -> Option<&str> {
        if offset >= bytes.len() {
            return None;
        }
        let rest = &bytes[offset..];
        let end = rest.iter().position(|&b| b == b'\n').unwrap_or(rest.len());
        offset += (end + 1).min(rest.len());
        let line = std::str::from_utf8(&rest[..end]).ok()?;
        Some(line.trim_end_matches('\r'))
    };

    if next_line() != Some("ply") {
        return Err(malformed("file does not start with `ply`"));
    }

    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let line = next_line().ok_or_else(|| malformed("missing `end_header`"))?;
        let mut words = line.split_whitespace();
        match words.next() {
            None | Some("comment") | Some("obj_info") => {}
            Some("format") => {
                let kind = words.next().ok_or_else(|| malformed("empty format line"))?;
                let version = words.next();
                format = Some(match (kind, version) {
                    ("ascii", Some("1.0")) => Format::Ascii,
                    ("binary_little_endian", Some("1.0")) => Format::BinaryLittleEndian,
                    ("binary_big_endian", _) => {
                        return Err(PlyError::UnsupportedFormat(kind.to_string()))
                    }
                    _ => return Err(PlyError::UnsupportedFormat(line.to_string())),
                });
            }
            Some("element") => {
                let name = words.next().ok_or_else(|| malformed("element without a name"))?;
                let count = words
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| malformed(&format!("element `{name}` has no valid count")))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            Some("property") => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| malformed("property declared before any element"))?;
                let first = words.next().ok_or_else(|| malformed("empty property line"))?;
                let scalar = |w: Option<&str>| {
                    w.and_then(Scalar::parse)
                        .ok_or_else(|| malformed(&format!("bad property type in `{line}`")))
                };
                let property = if first == "list" {
                    let count = scalar(words.next())?;
                    let item = scalar(words.next())?;
                    if count.is_float() {
                        return Err(malformed("list count type must be an integer"));
                    }
                    Property::List { count, item }
                } else {
                    let ty = scalar(Some(first))?;
                    let name = words
                        .next()
                        .ok_or_else(|| malformed("property without a name"))?;
                    Property::Scalar {
                        name: name.to_string(),
                        ty,
                    }
                };
                element.properties.push(property);
            }
            Some("end_header") => break,
            Some(other) => return Err(malformed(&format!("unknown header keyword `{other}`"))),
        }
    }

    let format = format.ok_or_else(|| malformed("missing format line"))?;
    Ok(Header {
        format,
        elements,
        body_offset: offset,
    })
}

/// Column positions of x, y, z within the vertex element.
fn coordinate_slots(vertex: &Element) -> Result<[usize; 3], PlyError> {
    let mut slots = [usize::MAX; 3];
    for (slot, name) in slots.iter_mut().zip(["x", "y", "z"]) {
        let found = vertex.properties.iter().position(
            |p| matches!(p, Property::Scalar { name: n, .. } if n == name),
        );
        let idx = found.ok_or(PlyError::MissingCoordinate(name))?;
        if let Property::Scalar { ty, name: n } = &vertex.properties[idx] {
            if !ty.is_float() {
                return Err(PlyError::CoordinateType {
                    name: n.clone(),
                    ty: format!("{ty:?}").to_lowercase(),
                });
            }
        }
        *slot = idx;
    }
    Ok(slots)
}

/// Parse a PLY file held in memory.
///
/// Vertices with any non-finite coordinate are dropped and counted in
/// [`PlyReport::dropped_non_finite`].
pub fn parse_ply(bytes: &[u8]) -> Result<PlyReport, PlyError> {
    let header = parse_header(bytes)?;
    let vertex_index = header
        .elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or(PlyError::MissingVertexElement)?;
    let slots = coordinate_slots(&header.elements[vertex_index])?;
    let body = &bytes[header.body_offset..];

    let mut sink = VertexSink::new(slots, header.elements[vertex_index].count);
    match header.format {
        Format::Ascii => read_ascii(body, &header.elements, vertex_index, &mut sink)?,
        Format::BinaryLittleEndian => read_binary(body, &header.elements, vertex_index, &mut sink)?,
    }
    Ok(PlyReport {
        cloud: PointCloud::new(sink.points),
        dropped_non_finite: sink.dropped,
    })
}

struct VertexSink {
    slots: [usize; 3],
    row: Vec<f64>,
    points: Vec<Point3>,
    dropped: usize,
}

impl VertexSink {
    fn new(slots: [usize; 3], capacity: usize) -> Self {
        Self {
            slots,
            row: Vec::new(),
            points: Vec::with_capacity(capacity.min(1 << 24)),
            dropped: 0,
        }
    }

    fn finish_row(&mut self) {
        let [ix, iy, iz] = self.slots;
        let p = Point3::new(self.row[ix], self.row[iy], self.row[iz]);
        if p.is_finite() {
            self.points.push(p);
        } else {
            self.dropped += 1;
        }
        self.row.clear();
    }
}

fn read_ascii(
    body: &[u8],
    elements: &[Element],
    vertex_index: usize,
    sink: &mut VertexSink,
) -> Result<(), PlyError> {
    let text = String::from_utf8_lossy(body);
    let mut tokens = text.split_ascii_whitespace();

    for (ei, element) in elements.iter().enumerate() {
        let is_vertex = ei == vertex_index;
        let truncated = |found| PlyError::TruncatedBody {
            element: element.name.clone(),
            expected: element.count,
            found,
        };
        for row in 0..element.count {
            for property in &element.properties {
                let mut next = || -> Result<f64, PlyError> {
                    let token = tokens.next().ok_or_else(|| truncated(row))?;
                    parse_ascii_number(token).ok_or_else(|| PlyError::InvalidValue {
                        element: element.name.clone(),
                        token: token.to_string(),
                    })
                };
                match property {
                    Property::Scalar { .. } => {
                        let v = next()?;
                        if is_vertex {
                            sink.row.push(v);
                        }
                    }
                    Property::List { .. } => {
                        let n = next()?;
                        for _ in 0..list_len(n, element)? {
                            next()?;
                        }
                        if is_vertex {
                            sink.row.push(f64::NAN);
                        }
                    }
                }
            }
            if is_vertex {
                sink.finish_row();
            }
        }
    }
    Ok(())
}

fn parse_ascii_number(token: &str) -> Option<f64> {
    match token.to_ascii_lowercase().as_str() {
        "nan" | "-nan" => Some(f64::NAN),
        "inf" | "+inf" | "infinity" => Some(f64::INFINITY),
        "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
        _ => token.parse().ok(),
    }
}

fn list_len(n: f64, element: &Element) -> Result<usize, PlyError> {
    if n < 0.0 || n.fract() != 0.0 {
        return Err(PlyError::InvalidValue {
            element: element.name.clone(),
            token: n.to_string(),
        });
    }
    Ok(n as usize)
}

fn read_binary(
    body: &[u8],
    elements: &[Element],
    vertex_index: usize,
    sink: &mut VertexSink,
) -> Result<(), PlyError> {
    let mut pos = 0usize;
    for (ei, element) in elements.iter().enumerate() {
        let is_vertex = ei == vertex_index;
        let truncated = |found| PlyError::TruncatedBody {
            element: element.name.clone(),
            expected: element.count,
            found,
        };
        for row in 0..element.count {
            for property in &element.properties {
                match *property {
                    Property::Scalar { ty, .. } => {
                        let end = pos + ty.size();
                        let bytes = body.get(pos..end).ok_or_else(|| truncated(row))?;
                        if is_vertex {
                            sink.row.push(ty.read_le(bytes));
                        }
                        pos = end;
                    }
                    Property::List { count, item } => {
                        let end = pos + count.size();
                        let bytes = body.get(pos..end).ok_or_else(|| truncated(row))?;
                        let n = list_len(count.read_le(bytes), element)?;
                        pos = end + n * item.size();
                        if pos > body.len() {
                            return Err(truncated(row));
                        }
                        if is_vertex {
                            sink.row.push(f64::NAN);
                        }
                    }
                }
            }
            if is_vertex {
                sink.finish_row();
            }
        }
    }
    Ok(())
}

/// Serialize a cloud as ascii PLY with `double` coordinates.
///
/// Values are printed with the shortest representation that parses back to
/// the same `f64`, so [`parse_ply`] recovers the coordinates exactly.
pub fn write_ply_ascii(cloud: &PointCloud) -> Vec<u8> {
    let mut out = String::with_capacity(64 + cloud.len() * 24);
    out.push_str("ply\nformat ascii 1.0\ncomment generated by echomap\n");
    let _ = writeln!(out, "element vertex {}", cloud.len());
    out.push_str("property double x\nproperty double y\nproperty double z\nend_header\n");
    for p in cloud.points() {
        let _ = writeln!(out, "{} {} {}", p.x, p.y, p.z);
    }
    out.into_bytes()
}
