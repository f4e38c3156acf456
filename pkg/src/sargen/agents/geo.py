"""Impossible-travel detection over geo-tagged transactions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from ..ingestion.model import GeoPoint, Transaction

EARTH_RADIUS_KM = 6371.0  # mean earth radius


def haversine_km(a: GeoPoint, b: GeoPoint) -> float:
    lat1, lon1, lat2, lon2 = map(math.radians, (a.lat, a.lon, b.lat, b.lon))
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    h = math.sin(dlat / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


@dataclass(frozen=True)
class GeoAnomaly:
    first_txn_id: str
    second_txn_id: str
    distance_km: float
    elapsed_hours: float
    implied_speed_kmh: float


def geo_anomaly_scan(transactions: Sequence[Transaction], max_speed_kmh: float) -> list[GeoAnomaly]:
    """Flag each consecutive (by time) geo-bearing pair whose implied speed
    strictly exceeds the cap. Zero elapsed time with nonzero distance counts
    as infinite speed."""
    located = [t for t in transactions if t.geo is not None]
    anomalies: list[GeoAnomaly] = []
    for prev, curr in zip(located, located[1:]):
        distance = haversine_km(prev.geo, curr.geo)
        elapsed_h = (curr.timestamp - prev.timestamp).total_seconds() / 3600.0
        if elapsed_h <= 0:
            if distance > 0:
                anomalies.append(GeoAnomaly(prev.id, curr.id, distance, 0.0, math.inf))
            continue
        speed = distance / elapsed_h
        if speed > max_speed_kmh:
            anomalies.append(GeoAnomaly(prev.id, curr.id, distance, elapsed_h, speed))
    return anomalies
