import json, random
from pyproj import Proj
from geographiclib.geodesic import Geodesic
random.seed(20201)
pts = [(0.0, 3.0), (40.0, -83.0), (39.99, -83.02), (-33.9, 151.2), (83.9, 10.0), (-79.9, -70.0)]
while len(pts) < 100:
    pts.append((round(random.uniform(-80, 84), 6), round(random.uniform(-180, 179.999), 6)))
out = []
for lat, lon in pts:
    zone = min(int((lon + 180) // 6) + 1, 60)
    south = lat < 0
    p = Proj(proj="utm", zone=zone, ellps="WGS84", south=south)
    e, n = p(lon, lat)
    out.append({"lat": lat, "lon": lon, "zone": zone, "northern": not south,
                "easting": round(e, 4), "northing": round(n, 4)})
g = Geodesic.WGS84
# meridian pairs 100 m apart
pairs = []
for lat0, lon0 in [(40.0, -83.0), (10.0, 20.5), (-45.0, 170.2)]:
    r = g.Direct(lat0, lon0, 0.0, 100.0)
    pairs.append({"lat0": lat0, "lon0": lon0, "lat1": r["lat2"], "lon1": r["lon2"]})
# targets 50 m ahead along heading
ahead = []
random.seed(7)
for _ in range(10):
    h = round(random.uniform(0, 360), 3)
    lat0, lon0 = 40.0 + random.uniform(-0.05, 0.05), -83.0 + random.uniform(-0.05, 0.05)
    r = g.Direct(lat0, lon0, h, 50.0)
    ahead.append({"lat": lat0, "lon": lon0, "heading": h, "rv_lat": r["lat2"], "rv_lon": r["lon2"], "range": 50.0})
json.dump({"utm": out, "meridian_100m": pairs, "dead_ahead_50m": ahead}, open("tests/data/geodesy_reference.json", "w"), indent=1)
