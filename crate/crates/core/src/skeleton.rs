//! Morphological thinning to 1-pixel-wide skeletons and spur pruning.
//!
//! Thinning deletes border pixels in four directional subpasses per round,
//! each deletion gated on the pixel being 8-simple (removal keeps both the
//! foreground 8-topology and the background 4-topology intact) and not an
//! endpoint. Sequential simple-point deletion guarantees the number of
//! 8-connected components never changes, and the fixed point of the pass
//! loop makes the operation idempotent.

use crate::image::BinaryImage;

/// Iterative thinning to an 8-connected, 1-pixel-wide skeleton.
pub fn skeletonize(bin: &BinaryImage) -> BinaryImage {
    let mut img = bin.clone();
    // deletion directions per subpass: north, south, west, east borders
    const DIRS: [(isize, isize); 4] = [(0, -1), (0, 1), (-1, 0), (1, 0)];
    let mut candidates = Vec::new();
    loop {
        let mut changed = false;
        for (dx, dy) in DIRS {
            // border pixels for this direction, fixed before any deletion so
            // one subpass peels exactly one layer and stays centered
            candidates.clear();
            for y in 0..img.height() {
                for x in 0..img.width() {
                    if img.get(x, y) == 1 && img.get_or_bg(x as isize + dx, y as isize + dy) == 0
                    {
                        candidates.push((x, y));
                    }
                }
            }
            // sequential deletion with the simple-point test re-evaluated on
            // the current image keeps the topology intact
            for &(x, y) in &candidates {
                let n = neighborhood(&img, x, y);
                let count = n.iter().filter(|&&b| b == 1).count();
                if count < 2 {
                    continue; // endpoints and isolated pixels stay
                }
                if is_simple(&n) {
                    img.set(x, y, 0);
                    changed = true;
                }
            }
        }
        if !changed {
            return img;
        }
    }
}

/// Removes skeleton spurs shorter than `min_branch` pixels that terminate in
/// an endpoint. Free segments (endpoints on both sides) are kept.
pub fn prune(bin: &BinaryImage, min_branch: usize) -> BinaryImage {
    let mut img = bin.clone();
    if min_branch == 0 {
        return img;
    }
    let endpoints: Vec<(usize, usize)> = (0..img.height())
        .flat_map(|y| (0..img.width()).map(move |x| (x, y)))
        .filter(|&(x, y)| img.get(x, y) == 1 && neighbor_count(&img, x, y) == 1)
        .collect();

    for (ex, ey) in endpoints {
        if img.get(ex, ey) == 0 || neighbor_count(&img, ex, ey) != 1 {
            continue; // already consumed by an earlier branch removal
        }
        // walk inward collecting the candidate spur
        let mut path = vec![(ex, ey)];
        let mut cur = sole_neighbor(&img, ex, ey).expect("endpoint has one neighbor");
        let spur = loop {
            if path.len() >= min_branch {
                break false; // long enough to keep
            }
            let ahead: Vec<(usize, usize)> = neighbors_of(&img, cur.0, cur.1)
                .into_iter()
                .filter(|p| !path.contains(p))
                .collect();
            match ahead.len() {
                0 => break false, // free segment: both ends are endpoints
                1 => {
                    path.push(cur);
                    cur = ahead[0];
                }
                _ => {
                    // cur attaches the branch to the rest of the skeleton;
                    // it belongs to the spur iff removing it keeps the rest
                    // locally connected
                    if attachment_is_removable(&img, cur, &path) {
                        path.push(cur);
                    }
                    break true;
                }
            }
        };
        if spur && path.len() < min_branch {
            for (x, y) in path {
                img.set(x, y, 0);
            }
        }
    }
    img
}

/// True when deleting `cur` (with the walked `path` already gone) keeps the
/// remaining neighborhood in one piece, i.e. `cur` is simple after the spur
/// pixels are cleared.
fn attachment_is_removable(img: &BinaryImage, cur: (usize, usize), path: &[(usize, usize)]) -> bool {
    const OFFS: [(isize, isize); 8] = [
        (1, 0),
        (1, 1),
        (0, 1),
        (-1, 1),
        (-1, 0),
        (-1, -1),
        (0, -1),
        (1, -1),
    ];
    let mut n = [0u8; 8];
    for (i, (dx, dy)) in OFFS.iter().enumerate() {
        let (nx, ny) = (cur.0 as isize + dx, cur.1 as isize + dy);
        let bit = img.get_or_bg(nx, ny);
        let in_path = nx >= 0 && ny >= 0 && path.contains(&(nx as usize, ny as usize));
        n[i] = if in_path { 0 } else { bit };
    }
    is_simple(&n)
}

/// 8-neighborhood bits clockwise from east: E, SE, S, SW, W, NW, N, NE.
fn neighborhood(img: &BinaryImage, x: usize, y: usize) -> [u8; 8] {
    const OFFS: [(isize, isize); 8] = [
        (1, 0),
        (1, 1),
        (0, 1),
        (-1, 1),
        (-1, 0),
        (-1, -1),
        (0, -1),
        (1, -1),
    ];
    let mut n = [0u8; 8];
    for (i, (dx, dy)) in OFFS.iter().enumerate() {
        n[i] = img.get_or_bg(x as isize + dx, y as isize + dy);
    }
    n
}

fn neighbor_count(img: &BinaryImage, x: usize, y: usize) -> usize {
    neighborhood(img, x, y).iter().filter(|&&b| b == 1).count()
}

fn neighbors_of(img: &BinaryImage, x: usize, y: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for dy in -1isize..=1 {
        for dx in -1isize..=1 {
            if dx == 0 && dy == 0 {
                continue;
            }
            if img.get_or_bg(x as isize + dx, y as isize + dy) == 1 {
                out.push(((x as isize + dx) as usize, (y as isize + dy) as usize));
            }
        }
    }
    out
}

fn sole_neighbor(img: &BinaryImage, x: usize, y: usize) -> Option<(usize, usize)> {
    let n = neighbors_of(img, x, y);
    if n.len() == 1 {
        Some(n[0])
    } else {
        None
    }
}

/// 8-simple test on the neighborhood bits: the foreground neighbors form
/// exactly one 8-connected group and at least one 4-neighbor is background.
/// For (8, 4) connectivity on a 3x3 neighborhood these two conditions
/// characterize topology-preserving deletion.
fn is_simple(n: &[u8; 8]) -> bool {
    // 4-neighbors sit at even indices (E, S, W, N)
    if n[0] == 1 && n[2] == 1 && n[4] == 1 && n[6] == 1 {
        return false;
    }
    // grid adjacency among the ring cells: consecutive cells always touch,
    // and the 4-neighbor pairs around each corner (E-S, S-W, W-N, N-E)
    // touch diagonally even when the corner cell between them is empty
    const EDGES: [(usize, usize); 12] = [
        (0, 1),
        (1, 2),
        (2, 3),
        (3, 4),
        (4, 5),
        (5, 6),
        (6, 7),
        (7, 0),
        (0, 2),
        (2, 4),
        (4, 6),
        (6, 0),
    ];
    let mut label: [usize; 8] = [0, 1, 2, 3, 4, 5, 6, 7];
    fn root(label: &mut [usize; 8], mut i: usize) -> usize {
        while label[i] != i {
            label[i] = label[label[i]];
            i = label[i];
        }
        i
    }
    for (a, b) in EDGES {
        if n[a] == 1 && n[b] == 1 {
            let (ra, rb) = (root(&mut label, a), root(&mut label, b));
            label[ra] = rb;
        }
    }
    let mut groups = 0;
    for i in 0..8 {
        if n[i] == 1 && root(&mut label, i) == i {
            groups += 1;
        }
    }
    groups == 1
}
