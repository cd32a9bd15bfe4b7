#!/usr/bin/env python3
"""Regenerates tests/data/vectors/catalog_tokens.vec.

Tokens are grouped into topic clusters; each cluster gets an orthogonal base
direction and every token sits close to its cluster base. This gives the
tests a small, offline stand-in for real pre-trained word vectors with
predictable neighborhood structure: in-topic cosines land near 1.0,
cross-topic cosines near 0.
"""

import math
import random

DIM = 24
NOISE = 0.12
SEED = 73

CLUSTERS = {
    "education": """
        student students college colleges university universities enrollment
        course courses department instructor professor campus pupil pupils
        academy academic education tuition semester grade grades records
        directory degree faculty exam exams lecture classroom scholarship
        graduate undergraduate major advisor
    """,
    "finance": """
        school schools finance financial budget budgets budgeted invested
        investment investments endowment funding funds spending accounts
        account fiscal money expense expenses revenue salary salaries payroll
        tax taxes cost costs donator donation grant grants treasury audit
    """,
    "animals": """
        pet pets animal animals cat cats dog dogs owner owners breed species
        veterinarian shelter adoption wildlife zoo aquarium
    """,
    "housing": """
        dorm dorms dormitory housing residence residences amenity amenities
        room rooms apartment apartments tenant tenants lease building
        occupancy landlord
    """,
    "books": """
        book books author authors order orders purchase purchases customer
        customers review reviews sales bookstore publisher publishers catalog
        royalties title titles press library libraries reader readers novel
        novels chapter page pages edition club isbn
    """,
    "sports": """
        soccer team teams player players match matches stadium stadiums coach
        coaches baseball basketball league leagues season tournament
        championship standings rankings fan fans club goal score scores
        athlete athletes sport sports
    """,
    "city": """
        city cities district districts rent rents price prices crime crimes
        rate rates park parks location locations real estate property
        properties land value values ground income incomes neighborhood
        population area zone zoning offer offers dname
    """,
    "health": """
        hospital hospitals patient patients doctor doctors appointment
        appointments ward wards treatment treatments clinic nurse nurses
        medicine medical surgery diagnosis prescription therapy
    """,
    "travel": """
        airline airlines flight flights aircraft airport airports booking
        bookings passenger passengers manifest travel trip trips route routes
        departure arrival pilot pilots crew luggage
    """,
    "music": """
        music fest festival festivals artist artists performance performances
        ticket tickets venue venues sponsor sponsors stage concert concerts
        band bands song songs album albums singer singers genre audience
    """,
    "numbers": """
        1 2 3 4 5 6 7 8 9 10 2020 2021 2022 2023 2024 2025
    """,
    "misc": """
        has in lives data avg total count name names id ids year years date
        dates type types status info detail details list code codes number
        group groups item items record entry entries level rank size weight
        age description text note notes
    """,
    "company": """
        employee employees company companies manager managers office offices
        staff hire hires contract contracts job jobs position positions
        headquarter headquarters branch branches wage wages resign promotion
        union shift shifts
    """,
    "vehicles": """
        car cars vehicle vehicles model models maker makers engine engines
        horsepower mpg cylinders fuel garage garages repair repairs dealer
        dealers mileage accelerate
    """,
    "politics": """
        election elections candidate candidates vote votes voter voters party
        parties governor senator representative district_office poll polls
        campaign campaigns delegate delegates county counties state states
    """,
    "food": """
        restaurant restaurants menu menus dish dishes meal meals chef chefs
        cuisine ingredient ingredients recipe recipes food foods drink drinks
        wine wines grape grapes appellation winery wineries rating_food
    """,
    "media": """
        tv television program programs channel channels episode episodes
        series movie movies film films director directors actor actors
        broadcast broadcasts cartoon cartoons network networks show shows
        news anchor
    """,
    "geography": """
        country countries region regions mountain mountains river rivers lake
        lakes continent continents border borders capital capitals climate
        elevation terrain map maps island islands sea seas
    """,
    "technology": """
        device devices software hardware version versions release releases
        repository repositories commit commits browser browsers website
        websites user users login logins session sessions server servers
        database databases table tables query queries
    """,
    "weather": """
        weather temperature temperatures rainfall humidity wind storm storms
        forecast forecasts station stations sunshine snowfall degree degrees
    """,
}


def normalize(v):
    norm = math.sqrt(sum(x * x for x in v))
    return [x / norm for x in v]


def gram_schmidt(vectors):
    basis = []
    for v in vectors:
        w = list(v)
        for b in basis:
            dot = sum(x * y for x, y in zip(w, b))
            w = [x - dot * y for x, y in zip(w, b)]
        basis.append(normalize(w))
    return basis


def main():
    rng = random.Random(SEED)
    raw = [[rng.gauss(0, 1) for _ in range(DIM)] for _ in CLUSTERS]
    bases = gram_schmidt(raw)

    lines = []
    for base, tokens in zip(bases, CLUSTERS.values()):
        for token in sorted(set(tokens.split())):
            vec = normalize([b + rng.gauss(0, NOISE) for b in base])
            lines.append(token + " " + " ".join(f"{x:.6f}" for x in vec))

    lines.sort()
    with open("tests/data/vectors/catalog_tokens.vec", "w") as out:
        out.write(f"{len(lines)} {DIM}\n")
        out.write("\n".join(lines) + "\n")
    print(f"wrote {len(lines)} vectors of dim {DIM}")


if __name__ == "__main__":
    main()
