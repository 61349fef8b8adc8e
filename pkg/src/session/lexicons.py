"""
Word lists used to build synthetic substitutes.
Kept disjoint from the detection gazetteers where practical so that a
pseudonym is unlikely to collide with a value a user actually discloses.
"""

GIVEN_NAMES = [
    "Alden", "Beatrix", "Corin", "Delphine", "Emrys", "Fenna", "Gideon", "Harriet",
    "Ivo", "Juno", "Kasper", "Liesel", "Magnus", "Nerys", "Orrin", "Petra",
    "Quentin", "Rosalind", "Silas", "Tamsin", "Ulric", "Vesna", "Wendell", "Xenia",
    "Yorick", "Zelda", "Anselm", "Brielle", "Caspian", "Dagny", "Evander", "Flora",
    "Gregor", "Hollis", "Imogen", "Jasper", "Kerensa", "Leopold", "Marisol", "Nils",
]

SURNAMES = [
    "Ashdown", "Blackwood", "Calloway", "Dunmore", "Ellery", "Fairbairn", "Galloway", "Hartley",
    "Ingram", "Jessop", "Kettering", "Lockhart", "Merriman", "Northcott", "Oakes", "Pembroke",
    "Quarles", "Radcliffe", "Sherwood", "Thackeray", "Underhill", "Vantongeren", "Whitlock", "Yardley",
    "Abernathy", "Birchall", "Crowther", "Drummond", "Eastwick", "Fenwick", "Greaves", "Holloway",
    "Irvine", "Jarrow", "Kingsley", "Lindqvale", "Marchetti", "Nightingale", "Ormsby", "Prescott",
]

CITIES = [
    "Albuquerque", "Boise", "Charleston", "Des Moines", "Eugene", "Fresno", "Grand Rapids",
    "Hartford", "Indianapolis", "Jacksonville", "Knoxville", "Lexington", "Madison", "Norfolk",
    "Omaha", "Providence", "Raleigh", "Spokane", "Tucson", "Wichita", "Anchorage", "Burlington",
    "Cheyenne", "Dayton", "El Paso", "Fargo", "Greenville", "Harrisburg", "Lansing", "Mobile Bay",
    "Reno", "Savannah", "Tallahassee", "Tulsa", "Valparaiso", "Winnipeg", "Halifax", "Aberdeen",
    "Bergen", "Cork", "Gdansk", "Leipzig", "Lyon", "Porto", "Tampere", "Utrecht", "Valencia",
]

STREET_NAMES = [
    "Alder", "Birch", "Cedar", "Elm", "Hawthorn", "Juniper", "Linden", "Magnolia",
    "Poplar", "Rowan", "Sycamore", "Willow", "Chestnut", "Laurel", "Spruce",
]

STREET_SUFFIXES = ["Street", "Avenue", "Road", "Lane", "Drive", "Court", "Way"]

ORGANIZATION_STEMS = [
    "Bluefield", "Copperline", "Driftwood", "Evergreen", "Foxglove", "Granite Peak",
    "Harborview", "Ironbridge", "Juniper Ridge", "Kestrel", "Lakeshore", "Meridian",
    "Northgate", "Oakhurst", "Pinecrest", "Quarry Hill", "Riverbend", "Silverleaf",
    "Tidewater", "Upland", "Westbrook", "Yellowstone Valley",
]

ORGANIZATION_SUFFIXES = [
    "Analytics", "Partners", "Holdings", "Labs", "Group", "Systems", "Health",
    "Logistics", "Consulting", "Industries",
]

MEDICAL_CONDITIONS = [
    "sleep apnea", "psoriasis", "gout", "glaucoma", "tinnitus", "eczema", "vertigo",
    "scoliosis", "anemia", "hypothyroidism", "sinusitis", "plantar fasciitis",
    "carpal tunnel syndrome", "osteoporosis", "rosacea", "fibromyalgia",
]

ETHNICITIES = [
    "Scandinavian", "Polynesian", "Andean", "Balkan", "Caribbean", "Central Asian",
    "Celtic", "Maghrebi", "Baltic", "Levantine", "Iberian", "Slavic",
]

EMAIL_DOMAINS = [
    "mailbox.example", "post.example", "inbox.example", "letters.example", "relay.example",
]

MONTH_NAMES = [
    "January", "February", "March", "April", "May", "June", "July", "August",
    "September", "October", "November", "December",
]
