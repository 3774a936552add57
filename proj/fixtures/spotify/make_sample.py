#!/usr/bin/env python3
"""Regenerates fixtures/spotify/sample (recorded API transcript, 137 tracks).

Playlist 37i9dQZF1DWYkaDif7Ztbp holds 137 tracks over two pages (100 + 37).
Playlist 37i9dQZF1DX4JAvHpjipBk repeats three of them and adds a null track
and a local file, so the unique count stays 137. The second /v1/tracks batch
is answered once with 429 (Retry-After: 3) before the real response.
"""
import json
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent / "sample"
MAIN = "37i9dQZF1DWYkaDif7Ztbp"
EXTRA = "37i9dQZF1DX4JAvHpjipBk"
TOKEN = "fixture-token"
AUTH = {"Authorization": "Bearer " + TOKEN}
API = "https://api.spotify.com"

rng = random.Random(2063)
ids = ["%022d" % (4_000_000_000 + 7919 * i) for i in range(137)]
ids = ["fx" + s[2:] for s in ids]


def track(i, tid):
    year = 2010 + rng.randrange(14)
    return {
        "id": tid,
        "name": "Fixture Song %03d" % (i + 1),
        "artists": [{"name": "Fixture Artist %d" % (i % 41 + 1)}]
        + ([{"name": "Guest %d" % (i % 7 + 1)}] if i % 9 == 0 else []),
        "album": {"release_date": "%d-%02d-%02d" % (year, rng.randrange(1, 13), rng.randrange(1, 29))},
        "popularity": min(82, int(rng.expovariate(1 / 25))) if i else 82,
        "is_local": False,
    }


def features(tid):
    return {
        "id": tid,
        "danceability": round(rng.uniform(0.3, 0.95), 3),
        "energy": round(rng.uniform(0.3, 0.95), 3),
        "key": rng.randrange(-1, 12),
        "loudness": round(rng.uniform(-14, -2), 3),
        "mode": rng.randrange(2),
        "speechiness": round(rng.uniform(0.03, 0.4), 4),
        "acousticness": round(rng.uniform(0, 0.8), 4),
        "instrumentalness": round(rng.uniform(0, 0.02), 6),
        "liveness": round(rng.uniform(0.05, 0.6), 4),
        "valence": round(rng.uniform(0.2, 0.95), 3),
        "tempo": round(rng.uniform(80, 180), 3),
        "duration_ms": rng.randrange(120000, 300000),
        "time_signature": rng.choice([3, 4, 4, 4, 5]),
    }


tracks = [track(i, t) for i, t in enumerate(ids)]
feats = [features(t) for t in ids]
interactions = []


def add(method, target, body, status=200, headers=None, match_auth=True):
    rq = {"method": method, "target": target}
    if match_auth:
        rq["headers"] = AUTH
    rs = {"status": status, "body": body}
    if headers:
        rs["headers"] = headers
    interactions.append({"request": rq, "response": rs})


add("POST", "/api/token",
    {"access_token": TOKEN, "token_type": "Bearer", "expires_in": 3600}, match_auth=False)


def page(pid, items, offset, total):
    nxt = None
    if offset + 100 < total:
        nxt = "%s/v1/playlists/%s/tracks?offset=%d&limit=100" % (API, pid, offset + 100)
    return {"href": "%s/v1/playlists/%s/tracks?offset=%d&limit=100" % (API, pid, offset),
            "items": items, "limit": 100, "offset": offset, "next": nxt, "total": total}


items = [{"added_at": "2023-01-01T00:00:00Z", "track": t} for t in tracks]
for off in (0, 100):
    add("GET", "/v1/playlists/%s/tracks?limit=100&offset=%d" % (MAIN, off),
        page(MAIN, items[off:off + 100], off, len(items)))
extra = [items[5], items[17], items[120], {"track": None},
         {"track": {"id": None, "name": "home demo", "is_local": True}}]
add("GET", "/v1/playlists/%s/tracks?limit=100&offset=0" % EXTRA, page(EXTRA, extra, 0, len(extra)))

for start in range(0, 137, 50):
    chunk = ids[start:start + 50]
    target = "/v1/tracks?ids=" + ",".join(chunk)
    if start == 50:
        add("GET", target, {"error": {"status": 429, "message": "API rate limit exceeded"}},
            status=429, headers={"Retry-After": "3"})
    add("GET", target, {"tracks": tracks[start:start + 50]})

for start in range(0, 137, 100):
    chunk = ids[start:start + 100]
    add("GET", "/v1/audio-features?ids=" + ",".join(chunk),
        {"audio_features": feats[start:start + 100]})

HERE.mkdir(parents=True, exist_ok=True)
(HERE / "transcript.json").write_text(json.dumps({"interactions": interactions}, indent=1) + "\n")
(HERE / "playlists.txt").write_text(
    "# Afrobeats playlists used for the fixture\n%s Afrobeats Hits\n%s Afro Party\n" % (MAIN, EXTRA))
