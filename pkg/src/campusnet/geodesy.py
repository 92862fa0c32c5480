"""Geographic sites and great-circle distances used as planning costs."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

EARTH_RADIUS_KM = 6371.0
TIERS = ("province", "university", "campus")
SITES_HEADER = ["id", "name", "tier", "lat_deg", "lon_deg"]


class SiteError(ValueError):
    """Malformed site data."""


class DuplicateSiteError(SiteError):
    def __init__(self, site_id: str):
        super().__init__(f"duplicate site id {site_id!r}")
        self.site_id = site_id


@dataclass(frozen=True)
class GeoPoint:
    lat_deg: float
    lon_deg: float

    def __post_init__(self):
        if not -90.0 <= self.lat_deg <= 90.0:
            raise SiteError(f"latitude {self.lat_deg} outside [-90, 90]")
        if not -180.0 <= self.lon_deg <= 180.0:
            raise SiteError(f"longitude {self.lon_deg} outside [-180, 180]")


@dataclass(frozen=True)
class Site:
    id: str
    name: str
    tier: str
    location: GeoPoint

    def __post_init__(self):
        if self.tier not in TIERS:
            raise SiteError(f"site {self.id!r}: tier {self.tier!r} not one of {TIERS}")


def haversine_km(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in km on a sphere of radius ``EARTH_RADIUS_KM``."""
    if a == b:
        return 0.0
    phi1, phi2 = math.radians(a.lat_deg), math.radians(b.lat_deg)
    dphi = phi2 - phi1
    dlam = math.radians(b.lon_deg - a.lon_deg)
    h = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def site_distance_km(a: Site, b: Site) -> float:
    return haversine_km(a.location, b.location)


def check_unique(sites) -> None:
    seen = set()
    for s in sites:
        if s.id in seen:
            raise DuplicateSiteError(s.id)
        seen.add(s.id)


def load_sites(path) -> list[Site]:
    """Read a sites CSV (``id,name,tier,lat_deg,lon_deg``) preserving row order.

    Raises ``SiteError`` with the offending line number on malformed rows and
    ``DuplicateSiteError`` when an id repeats.
    """
    path = Path(path)
    sites: list[Site] = []
    seen: set[str] = set()
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != SITES_HEADER:
            raise SiteError(f"{path}:1: header must be {','.join(SITES_HEADER)}")
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(SITES_HEADER):
                raise SiteError(f"{path}:{line}: expected 5 fields, got {len(row)}")
            sid, name, tier, lat, lon = (c.strip() for c in row)
            try:
                point = GeoPoint(float(lat), float(lon))
            except ValueError as exc:
                raise SiteError(f"{path}:{line}: {exc}") from None
            try:
                site = Site(sid, name, tier, point)
            except SiteError as exc:
                raise SiteError(f"{path}:{line}: {exc}") from None
            if sid in seen:
                raise DuplicateSiteError(sid)
            seen.add(sid)
            sites.append(site)
    return sites
