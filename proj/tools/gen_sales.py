#!/usr/bin/env python3
"""Generate a Caesar's Store sales file: Id,Item,Colour,Number (Roman)."""

import argparse
import csv
import random
import sys

ITEMS = ["Toga", "Tunic", "Sandals", "Cloak", "Belt", "Helmet"]
COLOURS = ["Purple", "White", "Red", "Brown", "Black"]
NUMERALS = [
    (1000, "M"), (900, "CM"), (500, "D"), (400, "CD"), (100, "C"), (90, "XC"),
    (50, "L"), (40, "XL"), (10, "X"), (9, "IX"), (5, "V"), (4, "IV"), (1, "I"),
]


def roman(n):
    out = []
    for value, symbol in NUMERALS:
        while n >= value:
            out.append(symbol)
            n -= value
    return "".join(out)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=50000)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--duplicates", type=float, default=0.0,
                        help="fraction of rows that repeat an earlier record")
    parser.add_argument("--sorted", action="store_true", help="emit rows sorted by Id")
    parser.add_argument("-o", "--output", default="-")
    args = parser.parse_args()

    rng = random.Random(args.seed)
    rows = []
    next_id = 1
    for _ in range(args.rows):
        if rows and rng.random() < args.duplicates:
            rows.append(list(rng.choice(rows)))
            continue
        rows.append([str(next_id), rng.choice(ITEMS), rng.choice(COLOURS), roman(rng.randint(1, 3999))])
        next_id += 1
    if args.sorted:
        rows.sort(key=lambda r: int(r[0]))

    out = sys.stdout if args.output == "-" else open(args.output, "w", newline="")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["Id", "Item", "Colour", "Number"])
    writer.writerows(rows)
    if out is not sys.stdout:
        out.close()


if __name__ == "__main__":
    main()
