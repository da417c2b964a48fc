"""Small deterministic datasets for tests, demos and the CLI ``fixtures`` command."""
from __future__ import annotations

from pathlib import Path

from .augmentation import derive_rng
from .dataset_io import Dialog, Turn, write_dialogs
from .kb import EntityMeta, Gender, KnowledgeBase, Triple, write_kb

_SYLLABLES = ("ka", "lo", "ri", "ven", "dor", "mal", "sa", "tu", "bel", "nor", "qui", "zan",
              "pe", "ral", "mon", "di", "gar", "lu", "fen", "or")

# property -> target category of the object, or None for a literal
_SCHEMA: dict[str, dict[str, str | None]] = {
    "person": {"birthplace": "country", "field of work": "ideology", "occupation": None,
               "student of": "person", "award received": None, "date of birth": None,
               "spouse": "person"},
    "country": {"capital": None, "continent": None, "official language": None,
                "head of state": "person", "lowest point": None},
    "food": {"country of origin": "country", "main ingredient": None, "course": None},
    "ideology": {"founded by": "person", "opposite of": "ideology", "inception": None},
    "historical event": {"location": "country", "participant": "person", "point in time": None},
}
_LITERALS = {
    "occupation": ["physicist", "painter", "poet", "astronomer", "lawyer", "composer"],
    "award received": ["Nobel Prize", "Copley Medal", "Pulitzer Prize", "Order of Merit"],
    "date of birth": ["1738", "1867", "1901", "1955", "1972"],
    "capital": ["Kabul", "Paris", "Lima", "Oslo", "Hanoi", "Quito"],
    "continent": ["Asia", "Europe", "Africa", "South America"],
    "official language": ["Pashto", "French", "Spanish", "Norwegian"],
    "lowest point": ["Amu Darya", "Dead Sea", "Caspian Depression", "Lake Assal"],
    "main ingredient": ["rice", "wheat", "lentils", "tomato", "cheese"],
    "course": ["main course", "dessert", "appetizer"],
    "inception": ["1848", "1789", "1917", "1520"],
    "point in time": ["1066", "1815", "1914", "1989"],
}
_POSSESSIVE = {Gender.MASCULINE: "his", Gender.FEMININE: "her", Gender.NEUTRAL: "its"}
_OBJECTIVE = {Gender.MASCULINE: "him", Gender.FEMININE: "her", Gender.NEUTRAL: "it"}
_SUBJECTIVE = {Gender.MASCULINE: "he", Gender.FEMININE: "she", Gender.NEUTRAL: "it"}


def _name(rng, taken: set[str]) -> str:
    while True:
        words = ["".join(rng.choice(_SYLLABLES) for _ in range(rng.randint(2, 3))).capitalize()
                 for _ in range(2)]
        name = " ".join(words)
        if name not in taken:
            taken.add(name)
            return name


def verbalize(t: Triple, gender: Gender, rng) -> list[str]:
    questions = [f"What is the {t.property} of {t.subject}?",
                 f"Can you tell me the {t.property} of {t.subject}?"]
    if gender in _POSSESSIVE and rng.random() < 0.6:
        pronominal = rng.choice([
            f"What is {_POSSESSIVE[gender]} {t.property}?",
            f"Which {t.property} is linked to {_OBJECTIVE[gender]}?",
            f"What {t.property} does {_SUBJECTIVE[gender]} have?",
        ])
        questions.insert(0 if rng.random() < 0.5 else 2, pronominal)
    return questions


def synthetic_corpus(
    seed: int = 0,
    n_dialogs: int = 50,
    entities_per_category: int = 12,
    min_turns: int = 5,
    max_turns: int = 8,
) -> tuple[KnowledgeBase, list[Dialog]]:
    """A random KB over a fixed schema and dialogs walking it from a root entity."""
    rng = derive_rng(seed, "fixture")
    taken: set[str] = set()
    entities: dict[str, list[EntityMeta]] = {}
    for cat in _SCHEMA:
        ents = []
        for _ in range(entities_per_category):
            if cat == "person":
                gender = rng.choice([Gender.MASCULINE, Gender.MASCULINE, Gender.FEMININE,
                                     Gender.FEMININE, Gender.OTHER, Gender.NEUTRAL])
            else:
                gender = Gender.NEUTRAL
            name = _name(rng, taken)
            ents.append(EntityMeta(name, name, cat, gender))
        entities[cat] = ents

    triples: list[Triple] = []
    for cat, ents in entities.items():
        for ent in ents:
            for prop, target in _SCHEMA[cat].items():
                if rng.random() < 0.15:
                    continue
                if target is None:
                    obj = rng.choice(_LITERALS[prop])
                else:
                    choices = [e for e in entities[target] if e.id != ent.id]
                    obj = rng.choice(choices).id
                triples.append(Triple(ent.id, prop, obj))

    meta = {e.id: e for ents in entities.values() for e in ents}
    verbs = {t: verbalize(t, meta[t.subject].gender, rng) for t in triples}
    kb = KnowledgeBase.build(triples, meta.values(), verbs)

    dialogs = []
    roots = [e for ents in entities.values() for e in ents]
    for i in range(n_dialogs):
        for _attempt in range(20):
            root = rng.choice(roots)
            turns = _walk(kb, root.id, rng.randint(min_turns, max_turns), rng)
            if len(turns) >= min_turns:
                break
        dialogs.append(Dialog(f"d{i:04d}", root.id, root.category, tuple(turns)))
    return kb, dialogs


def _walk(kb: KnowledgeBase, root: str, length: int, rng) -> list[Turn]:
    first = list(kb.by_subject(root))
    if not first:
        return []
    used: set[Triple] = set()
    focus = [root]
    turns = []
    while len(turns) < length:
        pool = [t for e in focus for t in kb.by_subject(e) if t not in used]
        if not turns:
            pool = [t for t in first if t not in used]
        if not pool:
            break
        t = rng.choice(pool)
        used.add(t)
        if kb.is_entity(t.object) and t.object not in focus:
            focus.append(t.object)
        refs = kb.verbalizations[t]
        turns.append(Turn(t, rng.choice(refs), t.object))
    return turns


def write_corpus(directory: str | Path, kb: KnowledgeBase, dialogs: list[Dialog]) -> Path:
    directory = Path(directory)
    write_kb(kb, directory / "kb")
    write_dialogs(directory / "dialogs.jsonl", dialogs)
    return directory


# The two worked examples: a five-turn quiz about a person and the
# gender-ambiguous pronoun case.
ACHAKZAI_TURNS = (
    (("Sitara Achakzai", "field of work", "feminism"), "What was the field of work of Sitara Achakzai?", "feminism"),
    (("Sitara Achakzai", "death manner", "murder"), "What was the cause of death of Achakzai?", "homicide"),
    (("Sitara Achakzai", "birthplace", "Afghanistan"), "Where was she born ?", "Afghanistan"),
    (("Afghanistan", "capital", "Kabul"), "What is the capital of Afghanistan?", "Kabul"),
    (("Afghanistan", "lowest point", "Amu Darya"), "What is the lowest point of Afghanistan?", "Amu Darya"),
)
HERSCHEL_TURNS = (
    (("NGC 2539", "discoverer or inventor", "William Herschel"), "Who found NGC 2423?", "William Herschel"),
    (("NGC 2539", "constellation", "Puppis"), "What is the name of the constellation which NGC 2423 belongs?", "Puppis"),
    (("William Herschel", "student of", "Nevil Maskelyne"), "What was the name of Herschel's teacher?", "Nevil Maskelyne"),
    (("William Herschel", "place of burial", "Westminster Abbey"), "where was he buried?", "Westminster Abbey"),
    (("Westminster Abbey", "country", "United Kingdom"), "In which country is Westminster Abbey?", "United Kingdom"),
)
EXAMPLE_ENTITIES = (
    EntityMeta("Sitara Achakzai", "Sitara Achakzai", "person", Gender.FEMININE),
    EntityMeta("Afghanistan", "Afghanistan", "country"),
    EntityMeta("NGC 2539", "NGC 2539", "astronomical object"),
    EntityMeta("William Herschel", "William Herschel", "person", Gender.MASCULINE),
    EntityMeta("Nevil Maskelyne", "Nevil Maskelyne", "person", Gender.MASCULINE),
    EntityMeta("Puppis", "Puppis", "constellation"),
    EntityMeta("Westminster Abbey", "Westminster Abbey", "building"),
    EntityMeta("United Kingdom", "United Kingdom", "country"),
)


def _turns(rows) -> tuple[Turn, ...]:
    return tuple(Turn(Triple(*t), q, a) for t, q, a in rows)


def example_dialogs() -> list[Dialog]:
    return [
        Dialog("achakzai", "Sitara Achakzai", "person", _turns(ACHAKZAI_TURNS)),
        Dialog("herschel", "NGC 2539", "astronomical object", _turns(HERSCHEL_TURNS)),
    ]


def example_kb() -> KnowledgeBase:
    """KB holding both example dialogs, each turn question stored as a verbalization."""
    turns = [t for d in example_dialogs() for t in d.turns]
    verbs = {t.triple: [t.question] for t in turns}
    return KnowledgeBase.build([t.triple for t in turns], EXAMPLE_ENTITIES, verbs)
