"""Bundled frequency tables for the synthetic portfolio generator.

Surname weights are deliberately head-heavy so that common names collide
across many policies, which is what makes search disambiguation worth
exercising at desk scale.
"""

# (name, weight) pairs; weights are relative sampling frequencies.
FIRST_NAMES = [
    ("John", 40), ("Mary", 36), ("James", 34), ("Patricia", 26), ("Robert", 32),
    ("Jennifer", 28), ("Michael", 34), ("Linda", 24), ("William", 28), ("Sarah", 26),
    ("David", 30), ("Karen", 20), ("Richard", 22), ("Susan", 22), ("Joseph", 22),
    ("Nancy", 16), ("Thomas", 22), ("Lisa", 18), ("Daniel", 20), ("Margaret", 14),
    ("Matthew", 18), ("Emily", 18), ("Brian", 18), ("Michelle", 14), ("Kevin", 16),
    ("Amanda", 14), ("Steven", 16), ("Laura", 12), ("Paul", 14), ("Rebecca", 12),
    ("Mark", 14), ("Sharon", 10), ("Eric", 12), ("Cynthia", 10), ("Andrew", 12),
    ("Kathleen", 10), ("George", 10), ("Amy", 10), ("Peter", 10), ("Angela", 8),
    ("Sean", 8), ("Brenda", 6), ("Carlos", 8), ("Marie", 8), ("Luis", 6),
    ("Diane", 6), ("Victor", 4), ("Rachel", 6), ("Dennis", 4), ("Teresa", 4),
]

SURNAMES = [
    ("Smith", 40), ("Sullivan", 36), ("Johnson", 32), ("Murphy", 30), ("Silva", 28),
    ("Brown", 26), ("Santos", 24), ("Miller", 22), ("Wilson", 20), ("Davis", 18),
    ("Walsh", 16), ("Kelly", 16), ("Anderson", 14), ("Martin", 12), ("White", 12),
    ("Thompson", 10), ("Garcia", 10), ("Lewis", 8), ("Rodriguez", 8), ("Hall", 8),
    ("Young", 6), ("Allen", 6), ("King", 6), ("Wright", 6), ("Scott", 6),
    ("Torres", 5), ("Nguyen", 5), ("Hill", 5), ("Flores", 5), ("Green", 5),
    ("Adams", 4), ("Nelson", 4), ("Baker", 4), ("Rivera", 4), ("Campbell", 4),
    ("Mitchell", 4), ("Carter", 4), ("Roberts", 4), ("Gomez", 4), ("Phillips", 4),
    ("Evans", 3), ("Turner", 3), ("Diaz", 3), ("Parker", 3), ("Cruz", 3),
    ("Edwards", 3), ("Collins", 3), ("Reyes", 3), ("Stewart", 3), ("Morris", 3),
    ("Morales", 3), ("Murray", 3), ("Cook", 3), ("Rogers", 3), ("Gutierrez", 2),
    ("Ortiz", 2), ("Morgan", 2), ("Cooper", 2), ("Peterson", 2), ("Bailey", 2),
    ("Reed", 2), ("Howard", 2), ("Ramos", 2), ("Kim", 2), ("Cox", 2),
    ("Ward", 2), ("Richardson", 2), ("Watson", 2), ("Brooks", 2), ("Chavez", 2),
    ("Wood", 2), ("James", 2), ("Bennett", 2), ("Gray", 2), ("Mendoza", 2),
    ("Ruiz", 2), ("Hughes", 2), ("Price", 2), ("Alvarez", 2), ("Castillo", 2),
    ("Sanders", 1), ("Patel", 1), ("Myers", 1), ("Long", 1), ("Ross", 1),
    ("Foster", 1), ("Jimenez", 1), ("Powell", 1), ("Jenkins", 1), ("Perry", 1),
    ("Russell", 1), ("Barnes", 1), ("Fisher", 1), ("Henderson", 1), ("Coleman", 1),
    ("Simmons", 1), ("Patterson", 1), ("Jordan", 1), ("Reynolds", 1), ("Hamilton", 1),
]

# (city, state, zip, weight); the carrier writes MA, ME, and NH only.
CITIES = [
    ("Boston", "MA", "02108", 30),
    ("Worcester", "MA", "01602", 18),
    ("Springfield", "MA", "01103", 14),
    ("Cambridge", "MA", "02139", 12),
    ("Lowell", "MA", "01852", 10),
    ("Fall River", "MA", "02721", 10),
    ("Quincy", "MA", "02169", 10),
    ("New Bedford", "MA", "02740", 8),
    ("Brockton", "MA", "02301", 8),
    ("Somerville", "MA", "02143", 6),
    ("Framingham", "MA", "01701", 6),
    ("Pittsfield", "MA", "01201", 4),
    ("Manchester", "NH", "03101", 12),
    ("Nashua", "NH", "03060", 8),
    ("Concord", "NH", "03301", 6),
    ("Portsmouth", "NH", "03801", 4),
    ("Keene", "NH", "03431", 3),
    ("Portland", "ME", "04101", 10),
    ("Bangor", "ME", "04401", 5),
    ("Augusta", "ME", "04330", 4),
    ("Lewiston", "ME", "04240", 4),
    ("Biddeford", "ME", "04005", 3),
]

STREET_NAMES = [
    "Main St", "Pleasant St", "Oak Ave", "Maple St", "Washington St",
    "Elm St", "Park Ave", "High St", "School St", "Church St",
    "Water St", "Union St", "Prospect St", "Spring St", "Center St",
    "Broadway", "Highland Ave", "Grove St", "River Rd", "Lake Ave",
    "Beacon St", "Chestnut St", "Franklin St", "Winter St", "Summer St",
]

# (make, model) pairs for covered vehicles.
VEHICLES = [
    ("Honda", "Civic"), ("Honda", "Accord"), ("Honda", "CR-V"),
    ("Toyota", "Camry"), ("Toyota", "Corolla"), ("Toyota", "RAV4"),
    ("Ford", "F-150"), ("Ford", "Escape"), ("Ford", "Explorer"),
    ("Chevrolet", "Silverado"), ("Chevrolet", "Equinox"), ("Chevrolet", "Malibu"),
    ("Subaru", "Outback"), ("Subaru", "Forester"), ("Subaru", "Impreza"),
    ("Nissan", "Altima"), ("Nissan", "Rogue"), ("Jeep", "Wrangler"),
    ("Jeep", "Grand Cherokee"), ("Hyundai", "Elantra"), ("Hyundai", "Tucson"),
    ("Kia", "Sorento"), ("Volkswagen", "Jetta"), ("GMC", "Sierra"),
]

CLAIM_DESCRIPTIONS = [
    "Rear-end collision at a stop light",
    "Hail damage to roof and gutters",
    "Windshield crack from road debris",
    "Backed into a parked car in a lot",
    "Water damage from a burst pipe",
    "Tree limb fell on parked vehicle",
    "Single-car slide-off in icy conditions",
    "Theft of personal property from vehicle",
    "Kitchen fire with smoke damage",
    "Sideswipe on the highway, minor damage",
    "Deer strike on a rural road",
    "Wind damage to siding and fence",
]

# Chunk ids in the bundled documentation corpus a claim may reference.
CLAIM_DOC_REFS = [
    "claims-handbook#0", "claims-handbook#1", "claims-handbook#2",
    "glass-coverage#0", "autopay-program#0", "bill-plans#0",
    "homeowners-guide#0", "commercial-auto-guide#0",
]
