"""Specialized typology detection agents and the account-linking tool."""

from .detectors import run_agent
from .findings import AGENT_IDS, SEVERITIES, AgentFinding, severity_for
from .geo import EARTH_RADIUS_KM, GeoAnomaly, geo_anomaly_scan, haversine_km
from .linkgraph import LinkEdge, LinkGraph, UnionFind, link_accounts
from .velocity import VelocityWindow, velocity_scan

__all__ = [
    "AGENT_IDS",
    "EARTH_RADIUS_KM",
    "AgentFinding",
    "GeoAnomaly",
    "LinkEdge",
    "LinkGraph",
    "SEVERITIES",
    "UnionFind",
    "VelocityWindow",
    "geo_anomaly_scan",
    "haversine_km",
    "link_accounts",
    "run_agent",
    "severity_for",
    "velocity_scan",
]
