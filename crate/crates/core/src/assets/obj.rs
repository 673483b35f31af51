//! Wavefront OBJ/MTL reading and writing.
//!
//! Only what head scans need: `v`, `vt`, `f` (polygons are fan-triangulated),
//! `mtllib`/`usemtl` and the MTL `map_Kd` texture. Normals, groups and
//! smoothing directives are skipped.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::Vector3;

use super::landmarks::write_landmarks;
use super::mesh::{Mesh, Texture};
use super::{resolve, AssetError, FaceModel};

#[derive(Debug, Clone)]
pub struct ObjData {
    pub mesh: Mesh,
    /// The single texture referenced through the MTL, if any.
    pub texture_path: Option<PathBuf>,
}

/// Parsed OBJ text before materials are resolved.
struct RawObj {
    mesh: Mesh,
    mtllibs: Vec<(usize, String)>,
    used_materials: BTreeSet<String>,
}

/// Load an OBJ file, its MTL libraries and the referenced texture.
pub fn load_obj(path: &Path) -> Result<ObjData, AssetError> {
    let text = std::fs::read_to_string(path).map_err(|e| AssetError::io(path, e))?;
    let raw = parse_raw(&text, path)?;
    let dir = path.parent().unwrap_or(Path::new("."));

    let mut materials: BTreeMap<String, Option<PathBuf>> = BTreeMap::new();
    for (line, lib) in &raw.mtllibs {
        let lib_path = resolve(dir, Path::new(lib));
        let mtl = std::fs::read_to_string(&lib_path).map_err(|_| {
            AssetError::parse(path, *line, format!("cannot read material library `{lib}`"))
        })?;
        let lib_dir = lib_path.parent().unwrap_or(Path::new(".")).to_path_buf();
        parse_mtl(&mtl, &lib_path, &lib_dir, &mut materials)?;
    }

    let textures: BTreeSet<PathBuf> = materials
        .iter()
        .filter(|(name, _)| raw.used_materials.is_empty() || raw.used_materials.contains(*name))
        .filter_map(|(_, tex)| tex.clone())
        .collect();
    if textures.len() > 1 {
        return Err(AssetError::Validation(format!(
            "{}: {} textures referenced; only a single texture atlas is supported",
            path.display(),
            textures.len()
        )));
    }

    let mut mesh = raw.mesh;
    let texture_path = textures.into_iter().next();
    if let Some(tex_path) = &texture_path {
        mesh.texture = Some(Arc::new(load_texture(tex_path)?));
    }
    Ok(ObjData { mesh, texture_path })
}

/// Parse OBJ text without touching the filesystem (materials are ignored).
pub fn parse_obj(text: &str, path: &Path) -> Result<Mesh, AssetError> {
    parse_raw(text, path).map(|r| r.mesh)
}

fn parse_raw(text: &str, path: &Path) -> Result<RawObj, AssetError> {
    let mut positions: Vec<Vector3<f64>> = Vec::new();
    let mut texcoords: Vec<[f64; 2]> = Vec::new();
    let mut vertices = Vec::new();
    let mut uvs = Vec::new();
    let mut any_uv = false;
    let mut triangles = Vec::new();
    let mut unify: HashMap<(usize, Option<usize>), u32> = HashMap::new();
    let mut mtllibs = Vec::new();
    let mut used_materials = BTreeSet::new();

    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        let mut tok = line.split_whitespace();
        let Some(key) = tok.next() else { continue };
        let err = |m: String| AssetError::parse(path, lineno, m);
        match key {
            "v" => {
                let c = parse_floats::<3>(&mut tok).map_err(err)?;
                positions.push(Vector3::new(c[0], c[1], c[2]));
            }
            "vt" => {
                let c = parse_floats::<2>(&mut tok).map_err(err)?;
                texcoords.push(c);
            }
            "f" => {
                let mut corners = Vec::new();
                for t in tok {
                    let mut parts = t.split('/');
                    let vi = resolve_index(parts.next(), positions.len(), "vertex").map_err(err)?;
                    let ti = match parts.next() {
                        None | Some("") => None,
                        s => Some(resolve_index(s, texcoords.len(), "texture coordinate").map_err(err)?),
                    };
                    let next = vertices.len() as u32;
                    let id = *unify.entry((vi, ti)).or_insert_with(|| {
                        vertices.push(positions[vi]);
                        uvs.push(ti.map(|t| texcoords[t]).unwrap_or([0.0, 0.0]));
                        next
                    });
                    any_uv |= ti.is_some();
                    corners.push(id);
                }
                if corners.len() < 3 {
                    return Err(err(format!("face has {} vertices, need at least 3", corners.len())));
                }
                for k in 1..corners.len() - 1 {
                    triangles.push([corners[0], corners[k], corners[k + 1]]);
                }
            }
            "mtllib" => {
                let name = line["mtllib".len()..].trim();
                if name.is_empty() {
                    return Err(err("mtllib without a file name".into()));
                }
                mtllibs.push((lineno, name.to_string()));
            }
            "usemtl" => {
                used_materials.insert(line["usemtl".len()..].trim().to_string());
            }
            _ => {}
        }
    }

    let mut mesh = Mesh::new(vertices, triangles);
    if any_uv {
        mesh.uvs = uvs;
    }
    Ok(RawObj {
        mesh,
        mtllibs,
        used_materials,
    })
}

fn parse_floats<'a, const N: usize>(
    tok: &mut impl Iterator<Item = &'a str>,
) -> Result<[f64; N], String> {
    let mut out = [0.0f64; N];
    for slot in out.iter_mut() {
        let t = tok.next().ok_or_else(|| format!("expected {N} coordinates"))?;
        *slot = t.parse().map_err(|_| format!("invalid number `{t}`"))?;
        if !slot.is_finite() {
            return Err(format!("non-finite number `{t}`"));
        }
    }
    Ok(out)
}

/// 1-based (or negative, relative) OBJ index to a 0-based index.
fn resolve_index(tok: Option<&str>, count: usize, what: &str) -> Result<usize, String> {
    let t = tok.filter(|t| !t.is_empty()).ok_or_else(|| format!("missing {what} index"))?;
    let raw: i64 = t.parse().map_err(|_| format!("invalid {what} index `{t}`"))?;
    let idx = if raw > 0 {
        raw - 1
    } else if raw < 0 {
        count as i64 + raw
    } else {
        return Err(format!("{what} index 0 is invalid (OBJ indices start at 1)"));
    };
    if idx < 0 || idx as usize >= count {
        return Err(format!("{what} index {raw} exceeds the {count} defined so far"));
    }
    Ok(idx as usize)
}

fn parse_mtl(
    text: &str,
    path: &Path,
    dir: &Path,
    materials: &mut BTreeMap<String, Option<PathBuf>>,
) -> Result<(), AssetError> {
    let mut current: Option<String> = None;
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("newmtl") => {
                let name = line["newmtl".len()..].trim().to_string();
                materials.insert(name.clone(), None);
                current = Some(name);
            }
            Some("map_Kd") => {
                // Options such as `-s 1 1 1` may precede the file name.
                let file = tok.last().ok_or_else(|| AssetError::parse(path, i + 1, "map_Kd without a file"))?;
                let Some(name) = &current else {
                    return Err(AssetError::parse(path, i + 1, "map_Kd before newmtl"));
                };
                materials.insert(name.clone(), Some(resolve(dir, Path::new(file))));
            }
            _ => {}
        }
    }
    Ok(())
}

fn load_texture(path: &Path) -> Result<Texture, AssetError> {
    let img = image::open(path).map_err(|e| AssetError::Image {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let rgb = img.to_rgb8();
    Ok(Texture::from_srgb8(rgb.width() as usize, rgb.height() as usize, rgb.as_raw()))
}

/// Write a mesh as OBJ. When `material` is given, `mtllib`/`usemtl` lines
/// reference it.
pub fn write_obj(mesh: &Mesh, material: Option<(&str, &str)>) -> String {
    let mut out = String::new();
    if let Some((lib, name)) = material {
        let _ = writeln!(out, "mtllib {lib}\nusemtl {name}");
    }
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
    }
    for uv in &mesh.uvs {
        let _ = writeln!(out, "vt {} {}", uv[0], uv[1]);
    }
    let textured = !mesh.uvs.is_empty();
    for t in &mesh.triangles {
        let [a, b, c] = t.map(|i| i + 1);
        if textured {
            let _ = writeln!(out, "f {a}/{a} {b}/{b} {c}/{c}");
        } else {
            let _ = writeln!(out, "f {a} {b} {c}");
        }
    }
    out
}

/// Write `model` as `<stem>.obj`, `<stem>.mtl`, `<stem>.png` and
/// `<stem>.lmk` in `dir`; returns the mesh and landmark paths.
pub fn write_face_model(model: &FaceModel, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf), AssetError> {
    let obj_path = dir.join(format!("{stem}.obj"));
    let lmk_path = dir.join(format!("{stem}.lmk"));
    let write = |p: &Path, s: &str| std::fs::write(p, s).map_err(|e| AssetError::io(p, e));

    let obj = match &model.mesh.texture {
        Some(tex) => {
            let png = dir.join(format!("{stem}.png"));
            image::save_buffer(
                &png,
                &tex.to_srgb8(),
                tex.width as u32,
                tex.height as u32,
                image::ColorType::Rgb8,
            )
            .map_err(|e| AssetError::Image {
                path: png.display().to_string(),
                message: e.to_string(),
            })?;
            write(&dir.join(format!("{stem}.mtl")), &format!("newmtl skin\nmap_Kd {stem}.png\n"))?;
            write_obj(&model.mesh, Some((&format!("{stem}.mtl"), "skin")))
        }
        None => write_obj(&model.mesh, None),
    };
    write(&obj_path, &obj)?;
    write(&lmk_path, &write_landmarks(&model.landmarks))?;
    Ok((obj_path, lmk_path))
}

#[cfg(test)]
mod tests {
    use super::*;

    const CUBE: &str = "\
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
v 0 0 1
v 1 0 1
v 1 1 1
v 0 1 1
f 1 4 3 2
f 5 6 7 8
f 1 2 6 5
f 2 3 7 6
f 3 4 8 7
f 4 1 5 8
";

    #[test]
    fn quads_are_fan_triangulated() {
        let m = parse_obj(CUBE, Path::new("cube.obj")).unwrap();
        assert_eq!(m.vertices.len(), 8);
        assert_eq!(m.triangles.len(), 12);
        assert!(m.uvs.is_empty());
    }

    #[test]
    fn index_past_vertex_count_reports_line() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\n# comment\nf 1 2 4\n";
        match parse_obj(text, Path::new("bad.obj")) {
            Err(AssetError::Parse { line, message, .. }) => {
                assert_eq!(line, 5);
                assert!(message.contains("exceeds"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_number_reports_line() {
        let err = parse_obj("v 0 0 0\nv 1 x 0\n", Path::new("m.obj")).unwrap_err();
        assert!(matches!(err, AssetError::Parse { line: 2, .. }));
    }

    #[test]
    fn negative_indices_and_uv_unification() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 0 1\nvt 0.5 0.5\nf -3/1 -2/2 -1/3\nf 1/4 2/2 3/3\n";
        let m = parse_obj(text, Path::new("m.obj")).unwrap();
        // Vertex 1 appears with two different texture coordinates.
        assert_eq!(m.vertices.len(), 4);
        assert_eq!(m.uvs.len(), 4);
        assert_eq!(m.triangles, vec![[0, 1, 2], [3, 1, 2]]);
        assert_eq!(m.uvs[3], [0.5, 0.5]);
    }

    #[test]
    fn multiple_textures_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path();
        std::fs::write(p.join("m.mtl"), "newmtl a\nmap_Kd a.png\nnewmtl b\nmap_Kd b.png\n").unwrap();
        std::fs::write(
            p.join("m.obj"),
            "mtllib m.mtl\nv 0 0 0\nv 1 0 0\nv 0 1 0\nusemtl a\nf 1 2 3\nusemtl b\nf 1 3 2\n",
        )
        .unwrap();
        let err = load_obj(&p.join("m.obj")).unwrap_err();
        assert!(err.to_string().contains("single texture"), "{err}");
    }
}
