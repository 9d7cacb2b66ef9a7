//! Rectangular street-grid geometry.
//!
//! A layout is a regular grid of square building blocks separated by
//! streets of constant width. Streets are indexed per axis; centerlines
//! sit on a pitch of `block_length + street_width`. Terminals are assigned
//! to the corridor whose centerline is nearest, routes between terminals
//! are enumerated a minimal number of corner turns, and all distances are
//! measured along street centerlines on the horizontal plane.

use crate::error::{Error, Result};

/// Point on the street plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Terminal position: street-plane coordinates plus height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn xy(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

/// Terminal role. The role selects which sigma/correlation-distance
/// columns of the parameter tables apply, independent of actual height.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Ap,
    Ue,
}

/// A transmitter or receiver placed inside a street corridor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Terminal {
    pub position: Point3,
    pub role: Role,
}

impl Terminal {
    pub fn new(position: Point3, role: Role) -> Self {
        Self { position, role }
    }
}

/// Street axis. Horizontal streets run along x, vertical along y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    Horizontal,
    Vertical,
}

impl Axis {
    pub fn perpendicular(self) -> Axis {
        match self {
            Axis::Horizontal => Axis::Vertical,
            Axis::Vertical => Axis::Horizontal,
        }
    }
}

/// Identifier of one street of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StreetId {
    pub axis: Axis,
    pub index: u32,
}

impl StreetId {
    pub fn horizontal(index: u32) -> Self {
        Self { axis: Axis::Horizontal, index }
    }

    pub fn vertical(index: u32) -> Self {
        Self { axis: Axis::Vertical, index }
    }
}

impl std::fmt::Display for StreetId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.axis {
            Axis::Horizontal => write!(f, "H{}", self.index),
            Axis::Vertical => write!(f, "V{}", self.index),
        }
    }
}

/// Street order of a link: the minimum number of corner turns needed to
/// connect the two terminals along the street graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StreetOrder {
    /// Same street, no turn (line of sight).
    Los,
    /// One corner turn.
    Nlos1,
    /// Two corner turns.
    Nlos2,
}

impl StreetOrder {
    pub fn index(self) -> usize {
        match self {
            StreetOrder::Los => 0,
            StreetOrder::Nlos1 => 1,
            StreetOrder::Nlos2 => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<StreetOrder> {
        match i {
            0 => Some(StreetOrder::Los),
            1 => Some(StreetOrder::Nlos1),
            2 => Some(StreetOrder::Nlos2),
            _ => None,
        }
    }
}

/// Validity bounds (strict) of the per-order distance fits: order 0 uses
/// the link distance, orders 1 and 2 the post-corner segment length.
pub fn order_validity(order: StreetOrder) -> (f64, f64) {
    match order {
        StreetOrder::Los => (15.0, 500.0),
        StreetOrder::Nlos1 => (1.0, 250.0),
        StreetOrder::Nlos2 => (1.0, 500.0),
    }
}

/// Validity bounds of the log-distance baseline over Euclidean distance.
pub const EUCLIDEAN_VALIDITY: (f64, f64) = (15.0, 500.0);

/// Attachment of a point to a street: the street, the coordinate of the
/// centerline projection along the street, and the lateral offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreetAttachment {
    pub street: StreetId,
    pub along: f64,
    pub lateral: f64,
}

/// Rectangular grid of square blocks separated by streets.
#[derive(Debug, Clone, PartialEq)]
pub struct GridLayout {
    pub block_length_m: f64,
    pub street_width_m: f64,
    pub building_height_m: f64,
    pub blocks_x: u32,
    pub blocks_y: u32,
    pub origin: Point2,
}

/// Builds a grid layout, validating the dimensions.
pub fn build_grid(
    block_length_m: f64,
    street_width_m: f64,
    building_height_m: f64,
    blocks_x: u32,
    blocks_y: u32,
) -> Result<GridLayout> {
    GridLayout::new(
        block_length_m,
        street_width_m,
        building_height_m,
        blocks_x,
        blocks_y,
        Point2::new(0.0, 0.0),
    )
}

impl GridLayout {
    pub fn new(
        block_length_m: f64,
        street_width_m: f64,
        building_height_m: f64,
        blocks_x: u32,
        blocks_y: u32,
        origin: Point2,
    ) -> Result<Self> {
        if !(block_length_m.is_finite() && street_width_m.is_finite() && building_height_m.is_finite()) {
            return Err(Error::InvalidArgument("grid dimensions must be finite".into()));
        }
        if street_width_m <= 0.0 || block_length_m <= street_width_m {
            return Err(Error::InvalidArgument(format!(
                "need block_length > street_width > 0, got block_length={block_length_m}, street_width={street_width_m}"
            )));
        }
        if building_height_m <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "building height must be positive, got {building_height_m}"
            )));
        }
        if blocks_x < 1 || blocks_y < 1 {
            return Err(Error::InvalidArgument(format!(
                "need at least one block per axis, got {blocks_x}x{blocks_y}"
            )));
        }
        Ok(Self {
            block_length_m,
            street_width_m,
            building_height_m,
            blocks_x,
            blocks_y,
            origin,
        })
    }

    /// Centerline-to-centerline spacing of parallel streets.
    pub fn pitch(&self) -> f64 {
        self.block_length_m + self.street_width_m
    }

    /// Number of streets on the given axis.
    pub fn street_count(&self, axis: Axis) -> u32 {
        match axis {
            // Horizontal streets are stacked along y.
            Axis::Horizontal => self.blocks_y + 1,
            Axis::Vertical => self.blocks_x + 1,
        }
    }

    pub fn intersection_count(&self) -> u64 {
        u64::from(self.blocks_x + 1) * u64::from(self.blocks_y + 1)
    }

    pub fn streets(&self) -> impl Iterator<Item = StreetId> + '_ {
        let h = (0..self.street_count(Axis::Horizontal)).map(StreetId::horizontal);
        let v = (0..self.street_count(Axis::Vertical)).map(StreetId::vertical);
        h.chain(v)
    }

    /// Coordinate of the street centerline on its cross axis
    /// (y for horizontal streets, x for vertical ones).
    pub fn centerline(&self, street: StreetId) -> f64 {
        let base = match street.axis {
            Axis::Horizontal => self.origin.y,
            Axis::Vertical => self.origin.x,
        };
        base + f64::from(street.index) * self.pitch()
    }

    /// Coordinate span of the street along its own axis, including the
    /// half-width overhang past the outermost intersections.
    pub fn along_span(&self, street: StreetId) -> (f64, f64) {
        let (base, blocks) = match street.axis {
            Axis::Horizontal => (self.origin.x, self.blocks_x),
            Axis::Vertical => (self.origin.y, self.blocks_y),
        };
        let half = self.street_width_m / 2.0;
        (base - half, base + f64::from(blocks) * self.pitch() + half)
    }

    fn along_of(street: StreetId, p: Point2) -> f64 {
        match street.axis {
            Axis::Horizontal => p.x,
            Axis::Vertical => p.y,
        }
    }

    fn cross_of(street: StreetId, p: Point2) -> f64 {
        match street.axis {
            Axis::Horizontal => p.y,
            Axis::Vertical => p.x,
        }
    }

    /// Whether the point lies inside the corridor of the given street.
    pub fn in_corridor(&self, street: StreetId, p: Point2) -> bool {
        let half = self.street_width_m / 2.0;
        let lateral = (Self::cross_of(street, p) - self.centerline(street)).abs();
        let along = Self::along_of(street, p);
        let (lo, hi) = self.along_span(street);
        lateral <= half && along >= lo && along <= hi
    }

    /// Assigns a point to the containing corridor whose centerline is
    /// nearest; on an exact tie the horizontal street wins. Errors when the
    /// point is inside a building footprint or outside the grid.
    pub fn assign_street(&self, p: Point2) -> Result<StreetAttachment> {
        let mut best: Option<StreetAttachment> = None;
        for street in self.streets() {
            if !self.in_corridor(street, p) {
                continue;
            }
            let att = StreetAttachment {
                street,
                along: Self::along_of(street, p),
                lateral: (Self::cross_of(street, p) - self.centerline(street)).abs(),
            };
            best = match best {
                None => Some(att),
                Some(b) => {
                    // Streets iterate horizontal-first, so strict `<` keeps
                    // the horizontal street on exact lateral ties.
                    if att.lateral < b.lateral {
                        Some(att)
                    } else {
                        Some(b)
                    }
                }
            };
        }
        best.ok_or_else(|| {
            Error::InvalidPosition(format!(
                "point ({}, {}) is not inside any street corridor",
                p.x, p.y
            ))
        })
    }

    /// Crossing point of two perpendicular streets.
    pub fn crossing(&self, a: StreetId, b: StreetId) -> Option<Point2> {
        match (a.axis, b.axis) {
            (Axis::Horizontal, Axis::Vertical) => {
                Some(Point2::new(self.centerline(b), self.centerline(a)))
            }
            (Axis::Vertical, Axis::Horizontal) => {
                Some(Point2::new(self.centerline(a), self.centerline(b)))
            }
            _ => None,
        }
    }

    /// All street attachments usable for routing. A terminal lying exactly
    /// on an intersection belongs to both crossing streets.
    pub fn attachments(&self, p: Point2) -> Result<Vec<StreetAttachment>> {
        let primary = self.assign_street(p)?;
        let mut atts = vec![primary];
        let perp_axis = primary.street.axis.perpendicular();
        let perp_base = match perp_axis {
            Axis::Horizontal => self.origin.y,
            Axis::Vertical => self.origin.x,
        };
        let k = ((primary.along - perp_base) / self.pitch()).round();
        if k >= 0.0 && (k as u32) < self.street_count(perp_axis) {
            let node_along = perp_base + k * self.pitch();
            // Exact coincidence with an intersection only: see assign_street
            // for the tie handling that makes this well defined.
            if primary.along == node_along && primary.lateral == 0.0 {
                let perp = StreetId { axis: perp_axis, index: k as u32 };
                atts.push(StreetAttachment {
                    street: perp,
                    along: self.centerline(primary.street),
                    lateral: 0.0,
                });
            }
        }
        Ok(atts)
    }
}

/// One minimal-turn route between two terminals, decomposed into
/// centerline segments.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub order: StreetOrder,
    /// Turn locations, at street-centerline intersections.
    pub corners: Vec<Point2>,
    /// Per-segment lengths; always `corners.len() + 1` entries.
    pub segment_lengths: Vec<f64>,
    /// Streets traversed, one per segment.
    pub street_ids: Vec<StreetId>,
}

impl Route {
    /// Path length along the streets (the Manhattan distance of the route).
    pub fn total_length(&self) -> f64 {
        self.segment_lengths.iter().sum()
    }
}

/// Classification of one AP-UE link.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkClassification {
    /// `None` when no route with at most two turns exists.
    pub order: Option<StreetOrder>,
    /// All distinct routes achieving the minimal order, ordered
    /// lexicographically by their corner coordinates.
    pub routes: Vec<Route>,
    /// Straight-line distance between the terminals on the street plane.
    pub euclidean_distance_m: f64,
    /// Whether the per-order distance bounds hold for every route.
    pub in_validity_range: bool,
    /// Street the AP is assigned to.
    pub ap_street: StreetId,
    /// Street the UE is assigned to.
    pub ue_street: StreetId,
}

impl LinkClassification {
    /// Shortest route length, when reachable.
    pub fn manhattan_distance_m(&self) -> Option<f64> {
        self.routes
            .iter()
            .map(Route::total_length)
            .min_by(f64::total_cmp)
    }
}

/// Indicator for extra corner loss: true when either endpoint sits further
/// than half the street width from the walls containing the corner, on
/// both coordinates. The comparison is strict, so the exact half-width
/// boundary returns false. Symmetric in its first two arguments.
pub fn corner_offset_indicator(ap: Point2, ue: Point2, corner: Point2, street_width_m: f64) -> bool {
    let half = street_width_m / 2.0;
    let min_x = (ap.x - corner.x).abs().min((ue.x - corner.x).abs());
    let min_y = (ap.y - corner.y).abs().min((ue.y - corner.y).abs());
    min_x > half || min_y > half
}

/// Classifies a link: finds the minimal turn count over all street-graph
/// routes (capped at two turns) and every distinct route achieving it.
pub fn classify_link(grid: &GridLayout, ap: &Terminal, ue: &Terminal) -> Result<LinkClassification> {
    let ap_xy = ap.position.xy();
    let ue_xy = ue.position.xy();
    let ap_primary = grid.assign_street(ap_xy)?;
    let ue_primary = grid.assign_street(ue_xy)?;
    let ap_atts = grid.attachments(ap_xy)?;
    let ue_atts = grid.attachments(ue_xy)?;

    let mut routes: Vec<Route> = Vec::new();
    let mut saw_coincident = false;

    for a in &ap_atts {
        for u in &ue_atts {
            if a.street == u.street {
                let d0 = (a.along - u.along).abs();
                if d0 == 0.0 {
                    saw_coincident = true;
                } else {
                    routes.push(Route {
                        order: StreetOrder::Los,
                        corners: vec![],
                        segment_lengths: vec![d0],
                        street_ids: vec![a.street],
                    });
                }
            } else if a.street.axis != u.street.axis {
                let corner = grid.crossing(a.street, u.street).expect("perpendicular");
                let d_c = (a.along - GridLayout::along_of(a.street, corner)).abs();
                let d1 = (GridLayout::along_of(u.street, corner) - u.along).abs();
                // Zero-length end segments mean the terminal sits on the
                // crossing itself; the at-node attachment already yields the
                // lower-order route for those.
                if d_c > 0.0 && d1 > 0.0 {
                    routes.push(Route {
                        order: StreetOrder::Nlos1,
                        corners: vec![corner],
                        segment_lengths: vec![d_c, d1],
                        street_ids: vec![a.street, u.street],
                    });
                }
            } else {
                let perp_axis = a.street.axis.perpendicular();
                for k in 0..grid.street_count(perp_axis) {
                    let mid = StreetId { axis: perp_axis, index: k };
                    let c1 = grid.crossing(a.street, mid).expect("perpendicular");
                    let c2 = grid.crossing(u.street, mid).expect("perpendicular");
                    let d_c = (a.along - GridLayout::along_of(a.street, c1)).abs();
                    let d_mid = (GridLayout::along_of(mid, c1) - GridLayout::along_of(mid, c2)).abs();
                    let d2 = (GridLayout::along_of(u.street, c2) - u.along).abs();
                    if d_c > 0.0 && d2 > 0.0 {
                        routes.push(Route {
                            order: StreetOrder::Nlos2,
                            corners: vec![c1, c2],
                            segment_lengths: vec![d_c, d_mid, d2],
                            street_ids: vec![a.street, mid, u.street],
                        });
                    }
                }
            }
        }
    }

    if routes.is_empty() && saw_coincident {
        return Err(Error::InvalidPosition(
            "terminals project to the same centerline point".into(),
        ));
    }

    let order = routes.iter().map(|r| r.order).min();
    if let Some(min_order) = order {
        routes.retain(|r| r.order == min_order);
    }
    sort_routes(&mut routes);
    routes.dedup();

    let in_validity_range = match order {
        Some(o) => {
            let (lo, hi) = order_validity(o);
            match o {
                StreetOrder::Los => {
                    let d = ap_xy.distance(&ue_xy);
                    d > lo && d < hi
                }
                _ => routes.iter().all(|r| {
                    let last = *r.segment_lengths.last().expect("nonempty");
                    last > lo && last < hi
                }),
            }
        }
        None => false,
    };

    Ok(LinkClassification {
        order,
        routes,
        euclidean_distance_m: ap_xy.distance(&ue_xy),
        in_validity_range,
        ap_street: ap_primary.street,
        ue_street: ue_primary.street,
    })
}

fn sort_routes(routes: &mut [Route]) {
    routes.sort_by(|a, b| {
        let ka = a.corners.iter().flat_map(|p| [p.x, p.y]);
        let kb = b.corners.iter().flat_map(|p| [p.x, p.y]);
        ka.zip(kb)
            .map(|(x, y)| x.total_cmp(&y))
            .find(|c| c.is_ne())
            .unwrap_or_else(|| {
                a.corners
                    .len()
                    .cmp(&b.corners.len())
                    .then_with(|| a.street_ids.cmp(&b.street_ids))
            })
    });
}
