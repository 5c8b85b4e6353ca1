//! Hand-authored cell templates.
//!
//! Each template meshes the unit cell for one canonical configuration of
//! trisected edges. Coordinates are integers over the fixed denominator
//! [`DEN`]; the raw data below is written over denominator 6 and scaled up.
//! Every template is audited at load time (planarity, convexity, orientation,
//! volume, wall patterns), so errors in this file cannot propagate silently.
//!
//! Template boundaries follow the face pattern catalogue exactly: a face
//! shows the pattern for its 4-bit code, which is what makes templates of
//! neighboring cells agree on shared faces.

/// Common denominator of all template coordinates. Divisible by 6 (raw
//  data) and by every denominator the projective inward warp produces from
//  sixths: 2*(3+k) for k in 0..=6, whose lcm is 5040.
pub const DEN: i64 = 5040;

/// One point of the unit cell, coordinates over `DEN`.
pub type Pt = [i64; 3];

/// One hexahedron: corners in the frozen order (four bottom counterclockwise,
/// then the four above them).
pub type Hex = [Pt; 8];

const F: i64 = DEN / 6;

fn h6(c: [[i64; 3]; 8]) -> Hex {
    c.map(|p| [p[0] * F, p[1] * F, p[2] * F])
}

/// Corner reorder that restores positive orientation after a mirror.
pub fn mirror_fix(h: Hex) -> Hex {
    [h[0], h[3], h[2], h[1], h[4], h[7], h[6], h[5]]
}

fn mirror_x(h: Hex) -> Hex {
    mirror_fix(h.map(|p| [DEN - p[0], p[1], p[2]]))
}

fn mirror_y(h: Hex) -> Hex {
    mirror_fix(h.map(|p| [p[0], DEN - p[1], p[2]]))
}

/// Quarter turn about the vertical axis (proper rotation, no reorder).
fn rot_z(h: Hex) -> Hex {
    h.map(|p| [DEN - p[1], p[0], p[2]])
}

/// No trisected edge: the cell itself. Code 0x000, 1 hex.
pub fn box_cell() -> Vec<Hex> {
    vec![h6([
        [0, 0, 0],
        [6, 0, 0],
        [6, 6, 0],
        [0, 6, 0],
        [0, 0, 6],
        [6, 0, 6],
        [6, 6, 6],
        [0, 6, 6],
    ])]
}

/// One trisected edge (code 0x001): a core column over the middle of the
/// marked edge, two side wedges, a roof slab and a back slab. 5 hexes.
pub fn single_edge() -> Vec<Hex> {
    let h2 = h6([
        [0, 0, 0],
        [2, 0, 0],
        [2, 4, 0],
        [0, 6, 0],
        [0, 0, 6],
        [2, 0, 4],
        [2, 4, 4],
        [0, 6, 6],
    ]);
    vec![
        h6([
            [2, 0, 0],
            [4, 0, 0],
            [4, 4, 0],
            [2, 4, 0],
            [2, 0, 4],
            [4, 0, 4],
            [4, 4, 4],
            [2, 4, 4],
        ]),
        h2,
        mirror_x(h2),
        h6([
            [2, 0, 4],
            [4, 0, 4],
            [4, 4, 4],
            [2, 4, 4],
            [0, 0, 6],
            [6, 0, 6],
            [6, 6, 6],
            [0, 6, 6],
        ]),
        h6([
            [2, 4, 0],
            [4, 4, 0],
            [6, 6, 0],
            [0, 6, 0],
            [2, 4, 4],
            [4, 4, 4],
            [6, 6, 6],
            [0, 6, 6],
        ]),
    ]
}

/// Two trisected edges sharing a face but not a corner (code 0x005): three
/// slabs between the marked edges plus a roof. 4 hexes.
pub fn parallel_pair() -> Vec<Hex> {
    let west = h6([
        [0, 0, 0],
        [2, 0, 0],
        [2, 6, 0],
        [0, 6, 0],
        [0, 0, 6],
        [2, 0, 4],
        [2, 6, 4],
        [0, 6, 6],
    ]);
    vec![
        h6([
            [2, 0, 0],
            [4, 0, 0],
            [4, 6, 0],
            [2, 6, 0],
            [2, 0, 4],
            [4, 0, 4],
            [4, 6, 4],
            [2, 6, 4],
        ]),
        west,
        mirror_x(west),
        h6([
            [2, 0, 4],
            [4, 0, 4],
            [4, 6, 4],
            [2, 6, 4],
            [0, 0, 6],
            [6, 0, 6],
            [6, 6, 6],
            [0, 6, 6],
        ]),
    ]
}

/// Quads of the adjacent-pair bottom pattern over denominator 6, in the same
/// layout the face catalogue uses for code 0b0011 (trisected v=0 and u=1).
pub const ADJACENT_QUADS: [[[i64; 2]; 4]; 11] = [
    [[4, 0], [6, 0], [6, 2], [4, 2]],
    [[2, 0], [4, 0], [4, 2], [3, 2]],
    [[4, 3], [4, 2], [6, 2], [6, 4]],
    [[0, 0], [2, 0], [3, 2], [1, 2]],
    [[4, 5], [4, 3], [6, 4], [6, 6]],
    [[3, 2], [4, 2], [4, 3], [3, 3]],
    [[0, 0], [1, 2], [1, 4], [0, 6]],
    [[0, 6], [2, 5], [4, 5], [6, 6]],
    [[1, 4], [1, 2], [3, 2], [3, 3]],
    [[3, 3], [4, 3], [4, 5], [2, 5]],
    [[0, 6], [1, 4], [3, 3], [2, 5]],
];

/// Dome base height over each vertex of the adjacent-pair pattern: cell
/// corners carry the full height, trisection marks and ring points 2/3, and
/// the four mid-surface points 1/3. Every pattern quad lifts to a planar top
/// at these heights.
fn adjacent_height(p: [i64; 2]) -> i64 {
    match p {
        [0, 0] | [6, 0] | [6, 6] | [0, 6] => 6,
        [2, 0] | [4, 0] | [6, 2] | [6, 4] => 4,
        [1, 2] | [1, 4] | [2, 5] | [4, 5] => 4,
        [3, 2] | [4, 2] | [4, 3] | [3, 3] => 2,
        _ => unreachable!("unknown pattern vertex {p:?}"),
    }
}

fn column(q: &[[i64; 2]; 4], top: impl Fn([i64; 2]) -> i64) -> Hex {
    let mut h = [[0i64; 3]; 8];
    for i in 0..4 {
        h[i] = [q[i][0], q[i][1], 0];
        h[i + 4] = [q[i][0], q[i][1], top(q[i])];
    }
    h6(h)
}

/// Two trisected edges sharing a corner (code 0x003): eleven columns over
/// the adjacent-pair pattern, closed by a four-hex dome. 15 hexes.
pub fn adjacent_pair() -> Vec<Hex> {
    let mut v: Vec<Hex> = ADJACENT_QUADS
        .iter()
        .map(|q| column(q, adjacent_height))
        .collect();
    // Dome: a south wedge along the corner box, a low centre cap, the high
    // roof, and a north wedge filling the remaining ring.
    v.push(h6([
        [2, 0, 4],
        [4, 0, 4],
        [4, 2, 2],
        [3, 2, 2],
        [0, 0, 6],
        [6, 0, 6],
        [6, 2, 4],
        [1, 2, 4],
    ]));
    v.push(h6([
        [3, 2, 2],
        [4, 2, 2],
        [4, 3, 2],
        [3, 3, 2],
        [1, 2, 4],
        [6, 2, 4],
        [6, 4, 4],
        [1, 4, 4],
    ]));
    v.push(h6([
        [1, 2, 4],
        [6, 2, 4],
        [6, 4, 4],
        [1, 4, 4],
        [0, 0, 6],
        [6, 0, 6],
        [6, 6, 6],
        [0, 6, 6],
    ]));
    v.push(h6([
        [2, 5, 4],
        [3, 3, 2],
        [4, 3, 2],
        [4, 5, 4],
        [0, 6, 6],
        [1, 4, 4],
        [6, 4, 4],
        [6, 6, 6],
    ]));
    v
}

/// Quads of the three-edge bottom pattern over denominator 6, in the same
/// layout the face catalogue uses for code 0b0111 (trisected v=0, u=1, v=1).
pub const THREE_EDGE_QUADS: [[[i64; 2]; 4]; 10] = [
    [[0, 0], [1, 2], [1, 4], [0, 6]],
    [[0, 0], [2, 0], [3, 2], [1, 2]],
    [[0, 6], [1, 4], [3, 4], [2, 6]],
    [[1, 2], [3, 2], [3, 4], [1, 4]],
    [[3, 2], [4, 2], [4, 4], [3, 4]],
    [[2, 0], [4, 0], [4, 2], [3, 2]],
    [[3, 4], [4, 4], [4, 6], [2, 6]],
    [[4, 0], [6, 0], [6, 2], [4, 2]],
    [[4, 2], [6, 2], [6, 4], [4, 4]],
    [[4, 4], [6, 4], [6, 6], [4, 6]],
];

/// Dome base height over each vertex of the three-edge pattern: cell corners
/// carry the full height, boundary trisection marks and the two west ring
/// points 2/3, and the four centre points 1/3. Every pattern quad lifts to a
/// planar top at these heights.
fn three_edge_height(p: [i64; 2]) -> i64 {
    match p {
        [0, 0] | [6, 0] | [6, 6] | [0, 6] => 6,
        [2, 0] | [4, 0] | [6, 2] | [6, 4] | [2, 6] | [4, 6] => 4,
        [1, 2] | [1, 4] => 4,
        [3, 2] | [3, 4] | [4, 2] | [4, 4] => 2,
        _ => unreachable!("unknown pattern vertex {p:?}"),
    }
}

/// Three trisected edges around a face, open on one side (code 0x007): ten
/// columns over the three-edge pattern, closed by a four-hex dome. 14 hexes.
pub fn three_edge() -> Vec<Hex> {
    let mut v: Vec<Hex> = THREE_EDGE_QUADS
        .iter()
        .map(|q| column(q, three_edge_height))
        .collect();
    // Dome: south and north wedges over the boundary boxes, a low centre
    // cap, and the roof.
    let south = h6([
        [2, 0, 4],
        [4, 0, 4],
        [4, 2, 2],
        [3, 2, 2],
        [0, 0, 6],
        [6, 0, 6],
        [6, 2, 4],
        [1, 2, 4],
    ]);
    v.push(south);
    v.push(mirror_y(south));
    v.push(h6([
        [3, 2, 2],
        [4, 2, 2],
        [4, 4, 2],
        [3, 4, 2],
        [1, 2, 4],
        [6, 2, 4],
        [6, 4, 4],
        [1, 4, 4],
    ]));
    v.push(h6([
        [1, 2, 4],
        [6, 2, 4],
        [6, 4, 4],
        [1, 4, 4],
        [0, 0, 6],
        [6, 0, 6],
        [6, 6, 6],
        [0, 6, 6],
    ]));
    v
}

/// All four edges of one face trisected (code 0x00F): a 3x3 ring of low
/// columns under a four-hex dome. 13 hexes.
pub fn face_loop() -> Vec<Hex> {
    let s_s = h6([
        [2, 0, 0],
        [4, 0, 0],
        [4, 2, 0],
        [2, 2, 0],
        [2, 0, 4],
        [4, 0, 4],
        [4, 2, 2],
        [2, 2, 2],
    ]);
    let k00 = h6([
        [0, 0, 0],
        [2, 0, 0],
        [2, 2, 0],
        [0, 2, 0],
        [0, 0, 6],
        [2, 0, 4],
        [2, 2, 2],
        [0, 2, 4],
    ]);
    let d_s = h6([
        [0, 2, 4],
        [2, 2, 2],
        [4, 2, 2],
        [6, 2, 4],
        [0, 0, 6],
        [2, 0, 4],
        [4, 0, 4],
        [6, 0, 6],
    ]);
    let mut v = vec![
        // Centre column of the ring.
        h6([
            [2, 2, 0],
            [4, 2, 0],
            [4, 4, 0],
            [2, 4, 0],
            [2, 2, 2],
            [4, 2, 2],
            [4, 4, 2],
            [2, 4, 2],
        ]),
    ];
    let mut side = s_s;
    let mut corner = k00;
    for _ in 0..4 {
        v.push(side);
        v.push(corner);
        side = rot_z(side);
        corner = rot_z(corner);
    }
    v.push(d_s);
    v.push(rot_z(rot_z(d_s)));
    v.push(h6([
        [2, 2, 2],
        [4, 2, 2],
        [4, 4, 2],
        [2, 4, 2],
        [0, 2, 4],
        [6, 2, 4],
        [6, 4, 4],
        [0, 4, 4],
    ]));
    v.push(h6([
        [0, 2, 4],
        [6, 2, 4],
        [6, 4, 4],
        [0, 4, 4],
        [0, 0, 6],
        [6, 0, 6],
        [6, 6, 6],
        [0, 6, 6],
    ]));
    v
}

fn boxes(xs: &[i64], ys: &[i64], zs: &[i64]) -> Vec<Hex> {
    let mut v = Vec::new();
    for iz in 0..zs.len() - 1 {
        for iy in 0..ys.len() - 1 {
            for ix in 0..xs.len() - 1 {
                let (x0, x1) = (xs[ix], xs[ix + 1]);
                let (y0, y1) = (ys[iy], ys[iy + 1]);
                let (z0, z1) = (zs[iz], zs[iz + 1]);
                v.push(h6([
                    [x0, y0, z0],
                    [x1, y0, z0],
                    [x1, y1, z0],
                    [x0, y1, z0],
                    [x0, y0, z1],
                    [x1, y0, z1],
                    [x1, y1, z1],
                    [x0, y1, z1],
                ]));
            }
        }
    }
    v
}

/// The four x-parallel edges trisected (code 0x505): three slabs.
pub fn slabs3() -> Vec<Hex> {
    boxes(&[0, 2, 4, 6], &[0, 6], &[0, 6])
}

/// All edges except the four y-parallel ones (code 0x5F5): nine beams
/// running along y.
pub fn beams9() -> Vec<Hex> {
    boxes(&[0, 2, 4, 6], &[0, 6], &[0, 2, 4, 6])
}

/// Every edge trisected (code 0xFFF): the full 27-subcell refinement.
pub fn cubes27() -> Vec<Hex> {
    let t = [0, 2, 4, 6];
    boxes(&t, &t, &t)
}

/// Adjacent pair on the bottom plus the aligned pair on top (code 0x303):
/// the adjacent-pair pattern extruded through the cell. 11 hexes.
pub fn adjacent_extrusion() -> Vec<Hex> {
    ADJACENT_QUADS.iter().map(|q| column(q, |_| 6)).collect()
}

/// One bottom edge, its top counterpart and all four verticals (code
/// 0x1F1): the single-edge face pattern extruded in three storeys. 12 hexes.
pub fn single_storeys() -> Vec<Hex> {
    let quads: [[[i64; 2]; 4]; 4] = [
        [[0, 0], [2, 0], [2, 4], [0, 6]],
        [[2, 0], [4, 0], [4, 4], [2, 4]],
        [[4, 0], [6, 0], [6, 6], [4, 4]],
        [[0, 6], [2, 4], [4, 4], [6, 6]],
    ];
    storeys(&quads)
}

/// Bottom adjacent pair, top counterpart and all four verticals (code
/// 0x3F3): the adjacent-pair pattern in three storeys. 33 hexes.
pub fn adjacent_storeys() -> Vec<Hex> {
    storeys(&ADJACENT_QUADS)
}

fn storeys(quads: &[[[i64; 2]; 4]]) -> Vec<Hex> {
    let mut v = Vec::with_capacity(quads.len() * 3);
    for q in quads {
        for z in [0i64, 2, 4] {
            let mut h = [[0i64; 3]; 8];
            for i in 0..4 {
                h[i] = [q[i][0], q[i][1], z];
                h[i + 4] = [q[i][0], q[i][1], z + 2];
            }
            v.push(h6(h));
        }
    }
    v
}

/// The hand-built templates with the edge codes their geometry realizes.
/// (Codes are as drawn; the atlas canonicalizes them on insertion.)
pub fn bespoke_templates() -> Vec<(u16, Vec<Hex>)> {
    vec![
        (0x000, box_cell()),
        (0x001, single_edge()),
        (0x003, adjacent_pair()),
        (0x005, parallel_pair()),
        (0x00F, face_loop()),
        (0x303, adjacent_extrusion()),
        (0x505, slabs3()),
        (0x5F5, beams9()),
        (0x1F1, single_storeys()),
        (0x3F3, adjacent_storeys()),
        (0xFFF, cubes27()),
    ]
}
