#!/usr/bin/env python3
# Writes daily/daily.csv: three cells of daily temperatures, 1950-2014, with
# a warming trend, a seasonal cycle and a few gaps.
import datetime
import math
import pathlib
import random

rng = random.Random(7)
cells = [(10.0, 45.0, 0.15), (10.5, 45.0, 0.25), (10.0, 45.5, -0.05)]
out = pathlib.Path(__file__).with_name("daily") / "daily.csv"
with out.open("w", newline="\n") as f:
    f.write("lon,lat,date,value\n")
    for lon, lat, trend in cells:
        day = datetime.date(1950, 1, 1)
        while day.year <= 2014:
            doy = day.timetuple().tm_yday
            v = 12.0 - 10.0 * math.cos(2 * math.pi * (doy - 15) / 365.25)
            v += trend * (day.year - 1982) / 10.0 + rng.gauss(0.0, 2.0)
            text = "NA" if rng.random() < 0.01 else f"{v:.2f}"
            f.write(f"{lon},{lat},{day.isoformat()},{text}\n")
            day += datetime.timedelta(days=1)
