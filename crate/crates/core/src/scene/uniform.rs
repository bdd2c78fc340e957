//! Uniform payload layout used by dispatch level one: every geometry is a
//! fixed-size header pointing into two shared pools, one of `f32` and one of
//! `u32`, and type-specific views are reconstructed from the pools on demand.

use bytemuck::{cast_slice, Pod, Zeroable};

use crate::relu::RfView;
use crate::sdf::{GridView, OctreeView, SbsView, SvsView};

use super::triangles::TriangleView;
use super::{Geometry, GeometryType};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Pod, Zeroable)]
#[repr(C)]
pub struct UniformHeader {
    pub tag: u32,
    pub f_offset: u32,
    pub f_len: u32,
    pub u_offset: u32,
    pub u_len: u32,
    pub aux: [u32; 3],
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct UniformPools {
    pub floats: Vec<f32>,
    pub uints: Vec<u32>,
}

impl UniformPools {
    fn push(&mut self, tag: GeometryType, floats: &[f32], uints: &[u32], aux: [u32; 3]) -> UniformHeader {
        let h = UniformHeader {
            tag: tag as u32,
            f_offset: self.floats.len() as u32,
            f_len: floats.len() as u32,
            u_offset: self.uints.len() as u32,
            u_len: uints.len() as u32,
            aux,
        };
        self.floats.extend_from_slice(floats);
        self.uints.extend_from_slice(uints);
        h
    }

    pub fn encode(&mut self, g: &Geometry) -> UniformHeader {
        match g {
            Geometry::Triangles(m) => {
                self.push(GeometryType::Triangles, cast_slice(&m.positions), cast_slice(&m.indices), [0; 3])
            }
            Geometry::SdfGrid(s) => self.push(GeometryType::SdfGrid, &s.values, &[], s.dims),
            Geometry::SdfFrameOctree(o) => self.push(GeometryType::SdfFrameOctree, cast_slice(&o.leaves), &[], [0; 3]),
            Geometry::SdfSvs(s) => self.push(GeometryType::SdfSvs, &[], cast_slice(&s.nodes), [0; 3]),
            Geometry::SdfSbs(s) => self.push(GeometryType::SdfSbs, &s.values, cast_slice(&s.bricks), [0; 3]),
            Geometry::RfGrid(f) => self.push(GeometryType::RfGrid, cast_slice(&f.data), cast_slice(&f.positions), f.dims),
        }
    }

    #[inline]
    pub fn floats(&self, h: &UniformHeader) -> &[f32] {
        &self.floats[h.f_offset as usize..(h.f_offset + h.f_len) as usize]
    }

    #[inline]
    pub fn uints(&self, h: &UniformHeader) -> &[u32] {
        &self.uints[h.u_offset as usize..(h.u_offset + h.u_len) as usize]
    }

    pub fn triangles(&self, h: &UniformHeader) -> TriangleView<'_> {
        TriangleView {
            positions: cast_slice(self.floats(h)),
            indices: cast_slice(self.uints(h)),
        }
    }

    pub fn grid(&self, h: &UniformHeader) -> GridView<'_> {
        GridView {
            dims: h.aux,
            values: self.floats(h),
        }
    }

    pub fn octree(&self, h: &UniformHeader) -> OctreeView<'_> {
        OctreeView {
            leaves: cast_slice(self.floats(h)),
        }
    }

    pub fn svs(&self, h: &UniformHeader) -> SvsView<'_> {
        SvsView {
            nodes: cast_slice(self.uints(h)),
        }
    }

    pub fn sbs(&self, h: &UniformHeader) -> SbsView<'_> {
        SbsView {
            bricks: cast_slice(self.uints(h)),
            values: self.floats(h),
        }
    }

    pub fn rf(&self, h: &UniformHeader) -> RfView<'_> {
        RfView {
            positions: cast_slice(self.uints(h)),
            data: cast_slice(self.floats(h)),
        }
    }
}
