use std::path::Path;

use crate::error::{Error, Result};
use crate::scene::TriangleMesh;

pub fn load_obj(path: impl AsRef<Path>) -> Result<TriangleMesh> {
    parse_obj(&std::fs::read_to_string(path)?)
}

/// Parses `v` and `f` records; polygons are triangulated as fans around
/// their first vertex. Face entries may be `i`, `i/t`, `i//n` or `i/t/n`,
/// with negative indices counting back from the latest vertex. Everything
/// else is ignored.
pub fn parse_obj(text: &str) -> Result<TriangleMesh> {
    let mut positions = Vec::new();
    let mut indices = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let err = |msg: String| Error::Obj { line, msg };
        let mut it = raw.split_whitespace();
        match it.next() {
            Some("v") => {
                let mut p = [0.0f32; 3];
                for c in &mut p {
                    let tok = it.next().ok_or_else(|| err("vertex needs 3 coordinates".into()))?;
                    *c = tok.parse().map_err(|_| err(format!("bad coordinate {tok:?}")))?;
                    if !c.is_finite() {
                        return Err(err(format!("non-finite coordinate {tok:?}")));
                    }
                }
                positions.push(p);
            }
            Some("f") => {
                let face = it
                    .map(|tok| {
                        let first = tok.split('/').next().unwrap_or("");
                        let i: i64 = first.parse().map_err(|_| err(format!("bad face index {tok:?}")))?;
                        let count = positions.len() as i64;
                        let resolved = if i > 0 { i - 1 } else { count + i };
                        if i == 0 || resolved < 0 || resolved >= count {
                            return Err(err(format!("face index {i} out of range (1..={count})")));
                        }
                        Ok(resolved as u32)
                    })
                    .collect::<Result<Vec<u32>>>()?;
                if face.len() < 3 {
                    return Err(err(format!("face has {} vertices", face.len())));
                }
                for k in 1..face.len() - 1 {
                    indices.push([face[0], face[k], face[k + 1]]);
                }
            }
            _ => {}
        }
    }
    TriangleMesh::new(positions, indices)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_triangle() {
        let m = parse_obj("# tri\nv 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n").unwrap();
        assert_eq!(m.positions.len(), 3);
        assert_eq!(m.indices, [[0, 1, 2]]);
    }

    #[test]
    fn quad_is_fanned() {
        let m = parse_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1 4//1\n").unwrap();
        assert_eq!(m.indices, [[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn negative_indices() {
        let m = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n").unwrap();
        assert_eq!(m.indices, [[0, 1, 2]]);
    }

    #[test]
    fn out_of_range_names_line() {
        let err = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\n\nf 1 2 4\n").unwrap_err();
        assert!(matches!(err, Error::Obj { line: 5, .. }), "{err}");
        assert!(err.to_string().contains("line 5"));
    }
}
