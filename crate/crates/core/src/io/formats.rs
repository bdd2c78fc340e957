//! Little-endian binary formats. Every `encode_*` output decodes back to an
//! equal value, and re-encoding that value reproduces the same bytes.

use bytemuck::{cast_slice, pod_read_unaligned, Pod};

use crate::error::{Error, Result};
use crate::lbvh::BvhNode;
use crate::math::{Aabb, Ray, Vec3};
use crate::relu::RfGrid;
use crate::render::Image;
use crate::scene::Hit;
use crate::sdf::{SbsBrick, SdfGrid, SparseBrickSet, SparseVoxelSet, SvsNode};

pub const LBVH_MAGIC: &[u8; 4] = b"LBVH";
pub const SDFG_MAGIC: &[u8; 4] = b"SDFG";
pub const SVS_MAGIC: &[u8; 4] = b"SVS1";
pub const SBS_MAGIC: &[u8; 4] = b"SBS1";
pub const RFG_MAGIC: &[u8; 4] = b"RFG1";
pub const RAYS_MAGIC: &[u8; 4] = b"RAYS";
pub const HITS_MAGIC: &[u8; 4] = b"HITS";
pub const IMG_MAGIC: &[u8; 4] = b"IMG1";

struct Writer(Vec<u8>);

impl Writer {
    fn new(magic: &[u8; 4]) -> Self {
        Self(magic.to_vec())
    }

    fn u32(&mut self, v: u32) -> &mut Self {
        self.0.extend_from_slice(&v.to_le_bytes());
        self
    }

    fn f32(&mut self, v: f32) -> &mut Self {
        self.0.extend_from_slice(&v.to_le_bytes());
        self
    }

    fn f32s(&mut self, v: &[f32]) -> &mut Self {
        for &x in v {
            self.f32(x);
        }
        self
    }

    fn u32s(&mut self, v: &[u32]) -> &mut Self {
        for &x in v {
            self.u32(x);
        }
        self
    }

    fn count(&mut self, n: usize) -> Result<&mut Self> {
        let n = u32::try_from(n).map_err(|_| Error::Malformed(format!("{n} records exceed the u32 count field")))?;
        Ok(self.u32(n))
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8], magic: &[u8; 4]) -> Result<Self> {
        let found = buf.get(..4).unwrap_or(buf);
        if found != magic {
            return Err(Error::BadMagic {
                expected: String::from_utf8_lossy(magic).into_owned(),
                found: String::from_utf8_lossy(found).into_owned(),
            });
        }
        Ok(Self { buf, pos: 4 })
    }

    fn bytes(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| {
            Error::Malformed(format!("truncated: need {n} bytes at offset {}, have {}", self.pos, self.buf.len()))
        })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes(4)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.bytes(4)?.try_into().unwrap()))
    }

    fn arr<const N: usize, T>(&mut self, f: impl Fn(&mut Self) -> Result<T>) -> Result<[T; N]>
    where
        T: Copy + Default,
    {
        let mut out = [T::default(); N];
        for v in &mut out {
            *v = f(self)?;
        }
        Ok(out)
    }

    /// `n` little-endian records of a plain-data type.
    fn records<T: Pod>(&mut self, n: usize) -> Result<Vec<T>> {
        let size = std::mem::size_of::<T>();
        let bytes = self.bytes(n.checked_mul(size).ok_or_else(|| Error::Malformed("record count overflows".into()))?)?;
        Ok(bytes.chunks_exact(size).map(pod_read_unaligned).collect())
    }

    fn f32_vec(&mut self, n: usize) -> Result<Vec<f32>> {
        let bytes = self.bytes(n.checked_mul(4).ok_or_else(|| Error::Malformed("value count overflows".into()))?)?;
        Ok(bytes.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn finish(self) -> Result<()> {
        if self.pos == self.buf.len() {
            Ok(())
        } else {
            Err(Error::Malformed(format!("{} trailing bytes", self.buf.len() - self.pos)))
        }
    }
}

fn cell_count(dims: [u32; 3]) -> Result<usize> {
    dims.iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d as usize))
        .ok_or_else(|| Error::Malformed(format!("dims {dims:?} overflow")))
}

pub fn encode_lbvh(nodes: &[BvhNode]) -> Result<Vec<u8>> {
    let mut w = Writer::new(LBVH_MAGIC);
    w.count(nodes.len())?;
    for n in nodes {
        w.f32s(&n.bounds.min.to_array())
            .f32s(&n.bounds.max.to_array())
            .u32s(&[n.left, n.right, n.first_prim, n.prim_count]);
    }
    Ok(w.0)
}

pub fn decode_lbvh(buf: &[u8]) -> Result<Vec<BvhNode>> {
    let mut r = Reader::new(buf, LBVH_MAGIC)?;
    let n = r.u32()? as usize;
    let mut nodes = Vec::with_capacity(n.min(buf.len() / 40));
    for _ in 0..n {
        let min = r.arr::<3, _>(Reader::f32)?;
        let max = r.arr::<3, _>(Reader::f32)?;
        let [left, right, first_prim, prim_count] = r.arr::<4, _>(Reader::u32)?;
        nodes.push(BvhNode {
            bounds: Aabb::new(Vec3::from_array(min), Vec3::from_array(max)),
            left,
            right,
            first_prim,
            prim_count,
        });
    }
    r.finish()?;
    Ok(nodes)
}

pub fn encode_sdf_grid(g: &SdfGrid) -> Vec<u8> {
    let mut w = Writer::new(SDFG_MAGIC);
    w.u32s(&g.dims).f32s(&g.values);
    w.0
}

pub fn decode_sdf_grid(buf: &[u8]) -> Result<SdfGrid> {
    let mut r = Reader::new(buf, SDFG_MAGIC)?;
    let dims = r.arr::<3, _>(Reader::u32)?;
    let values = r.f32_vec(cell_count(dims)?)?;
    r.finish()?;
    SdfGrid::new(dims, values)
}

pub fn encode_svs(s: &SparseVoxelSet) -> Result<Vec<u8>> {
    let mut w = Writer::new(SVS_MAGIC);
    w.count(s.nodes.len())?;
    w.0.extend_from_slice(cast_slice(&s.nodes));
    Ok(w.0)
}

pub fn decode_svs(buf: &[u8]) -> Result<SparseVoxelSet> {
    let mut r = Reader::new(buf, SVS_MAGIC)?;
    let n = r.u32()? as usize;
    let nodes = r.records::<SvsNode>(n)?;
    r.finish()?;
    Ok(SparseVoxelSet { nodes })
}

/// Layout: magic, brick count, brick headers, value count, values.
pub fn encode_sbs(s: &SparseBrickSet) -> Result<Vec<u8>> {
    let mut w = Writer::new(SBS_MAGIC);
    w.count(s.bricks.len())?;
    w.0.extend_from_slice(cast_slice(&s.bricks));
    w.count(s.values.len())?.f32s(&s.values);
    Ok(w.0)
}

pub fn decode_sbs(buf: &[u8]) -> Result<SparseBrickSet> {
    let mut r = Reader::new(buf, SBS_MAGIC)?;
    let n = r.u32()? as usize;
    let bricks = r.records::<SbsBrick>(n)?;
    let m = r.u32()? as usize;
    let values = r.f32_vec(m)?;
    r.finish()?;
    if let Some(b) = bricks.iter().find(|b| b.value_offset as usize + b.value_count() > values.len()) {
        return Err(Error::Malformed(format!("brick at {:?} reads past the value array", b.pos)));
    }
    Ok(SparseBrickSet { bricks, values })
}

pub fn encode_rf_grid(g: &RfGrid) -> Vec<u8> {
    let mut w = Writer::new(RFG_MAGIC);
    w.u32s(&g.dims).f32(g.threshold);
    for c in &g.cells {
        w.f32s(c);
    }
    w.0
}

pub fn decode_rf_grid(buf: &[u8]) -> Result<RfGrid> {
    let mut r = Reader::new(buf, RFG_MAGIC)?;
    let dims = r.arr::<3, _>(Reader::u32)?;
    let threshold = r.f32()?;
    let n = cell_count(dims)?;
    let flat = r.f32_vec(n.checked_mul(4).ok_or_else(|| Error::Malformed("cell count overflows".into()))?)?;
    r.finish()?;
    let grid = RfGrid {
        dims,
        threshold,
        cells: flat.chunks_exact(4).map(|c| [c[0], c[1], c[2], c[3]]).collect(),
    };
    grid.validate()?;
    Ok(grid)
}

pub fn encode_rays(rays: &[Ray]) -> Result<Vec<u8>> {
    let mut w = Writer::new(RAYS_MAGIC);
    w.count(rays.len())?;
    for r in rays {
        w.f32s(&r.to_packed());
    }
    Ok(w.0)
}

pub fn decode_rays(buf: &[u8]) -> Result<Vec<Ray>> {
    let mut r = Reader::new(buf, RAYS_MAGIC)?;
    let n = r.u32()? as usize;
    let flat = r.f32_vec(n.checked_mul(8).ok_or_else(|| Error::Malformed("ray count overflows".into()))?)?;
    r.finish()?;
    Ok(flat.chunks_exact(8).map(|c| Ray::from_packed(c.try_into().unwrap())).collect())
}

pub fn encode_hits(hits: &[Hit]) -> Result<Vec<u8>> {
    let mut w = Writer::new(HITS_MAGIC);
    w.count(hits.len())?;
    for h in hits {
        w.f32(h.t).u32s(&[h.prim_id, h.geom_id, h.inst_id]).f32s(&h.coords);
    }
    Ok(w.0)
}

pub fn decode_hits(buf: &[u8]) -> Result<Vec<Hit>> {
    let mut r = Reader::new(buf, HITS_MAGIC)?;
    let n = r.u32()? as usize;
    let mut hits = Vec::with_capacity(n.min(buf.len() / 24));
    for _ in 0..n {
        let t = r.f32()?;
        let [prim_id, geom_id, inst_id] = r.arr::<3, _>(Reader::u32)?;
        let coords = r.arr::<2, _>(Reader::f32)?;
        hits.push(Hit {
            t,
            prim_id,
            geom_id,
            inst_id,
            coords,
        });
    }
    r.finish()?;
    Ok(hits)
}

pub fn encode_image(img: &Image) -> Vec<u8> {
    let mut w = Writer::new(IMG_MAGIC);
    w.u32(img.width).u32(img.height);
    for p in &img.pixels {
        w.f32s(p);
    }
    w.0
}

pub fn decode_image(buf: &[u8]) -> Result<Image> {
    let mut r = Reader::new(buf, IMG_MAGIC)?;
    let (width, height) = (r.u32()?, r.u32()?);
    let n = (width as usize)
        .checked_mul(height as usize)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| Error::Malformed("image size overflows".into()))?;
    let flat = r.f32_vec(n)?;
    r.finish()?;
    Ok(Image {
        width,
        height,
        pixels: flat.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect(),
    })
}
