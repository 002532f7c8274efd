"""Verb inflection tables, verb-pattern predicates and rule generalization.

Regular verbs are inflected by orthographic rule; a built-in table covers the
common irregulars and users can load a fuller table from a TSV file
(``base \\t 3sg \\t past \\t pastpart \\t prespart``).

The parametric predicates expand at compile time:

* ``actInd(subject, verb, "base")`` holds when ``verb`` is any inflected form
  of the base with an active (non-``auxpass``) clause and an ``nsubj`` or
  propagated ``xsubj`` link to ``subject``.
* ``passInd(patient, verb, "base")`` holds when ``verb`` is the past
  participle with ``nsubjpass`` and an ``auxpass`` auxiliary; the agent, when
  expressed, is reachable through a separate ``agent`` atom.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from .rules import (And, Atom, Const, Exists, Not, Or, Rule, RuleError, Var,
                    free_vars, normalize)

_VOWELS = "aeiou"
_NO_DOUBLE_FINALS = "wxy"
# Word-final double consonants that are normally part of the stem itself
# rather than inflection doubling (tell/telling vs run/running).
_STEM_DOUBLES = {"ll", "ss", "ff", "zz"}

FORM_KEYS = ("3sg", "past", "pastpart", "prespart")

# base: (past, pastpart); 3sg and present participle follow the regular rules
# for all of these.
_IRREGULAR_PAST = {
    "arise": ("arose", "arisen"), "awake": ("awoke", "awoken"),
    "bear": ("bore", "borne"), "beat": ("beat", "beaten"),
    "become": ("became", "become"), "begin": ("began", "begun"),
    "bend": ("bent", "bent"), "bet": ("bet", "bet"),
    "bind": ("bound", "bound"), "bite": ("bit", "bitten"),
    "bleed": ("bled", "bled"), "blow": ("blew", "blown"),
    "break": ("broke", "broken"), "breed": ("bred", "bred"),
    "bring": ("brought", "brought"), "broadcast": ("broadcast", "broadcast"),
    "build": ("built", "built"), "burn": ("burned", "burned"),
    "burst": ("burst", "burst"), "buy": ("bought", "bought"),
    "cast": ("cast", "cast"), "catch": ("caught", "caught"),
    "choose": ("chose", "chosen"), "cling": ("clung", "clung"),
    "come": ("came", "come"), "cost": ("cost", "cost"),
    "creep": ("crept", "crept"), "cut": ("cut", "cut"),
    "deal": ("dealt", "dealt"), "dig": ("dug", "dug"),
    "dive": ("dove", "dived"), "draw": ("drew", "drawn"),
    "dream": ("dreamed", "dreamed"), "drink": ("drank", "drunk"),
    "drive": ("drove", "driven"), "eat": ("ate", "eaten"),
    "fall": ("fell", "fallen"), "feed": ("fed", "fed"),
    "feel": ("felt", "felt"), "fight": ("fought", "fought"),
    "find": ("found", "found"), "flee": ("fled", "fled"),
    "fling": ("flung", "flung"), "fly": ("flew", "flown"),
    "forbid": ("forbade", "forbidden"), "forget": ("forgot", "forgotten"),
    "forgive": ("forgave", "forgiven"), "freeze": ("froze", "frozen"),
    "get": ("got", "gotten"), "give": ("gave", "given"),
    "grind": ("ground", "ground"), "grow": ("grew", "grown"),
    "hang": ("hung", "hung"), "hear": ("heard", "heard"),
    "hide": ("hid", "hidden"), "hit": ("hit", "hit"),
    "hold": ("held", "held"), "hurt": ("hurt", "hurt"),
    "keep": ("kept", "kept"), "kneel": ("knelt", "knelt"),
    "know": ("knew", "known"), "lay": ("laid", "laid"),
    "lead": ("led", "led"), "lean": ("leaned", "leaned"),
    "leap": ("leaped", "leaped"), "learn": ("learned", "learned"),
    "leave": ("left", "left"), "lend": ("lent", "lent"),
    "let": ("let", "let"), "lie": ("lay", "lain"),
    "light": ("lit", "lit"), "lose": ("lost", "lost"),
    "make": ("made", "made"), "mean": ("meant", "meant"),
    "meet": ("met", "met"), "mistake": ("mistook", "mistaken"),
    "overcome": ("overcame", "overcome"), "overtake": ("overtook", "overtaken"),
    "pay": ("paid", "paid"), "prove": ("proved", "proven"),
    "put": ("put", "put"), "quit": ("quit", "quit"),
    "read": ("read", "read"), "ride": ("rode", "ridden"),
    "ring": ("rang", "rung"), "rise": ("rose", "risen"),
    "run": ("ran", "run"), "say": ("said", "said"),
    "see": ("saw", "seen"), "seek": ("sought", "sought"),
    "sell": ("sold", "sold"), "send": ("sent", "sent"),
    "set": ("set", "set"), "shake": ("shook", "shaken"),
    "shed": ("shed", "shed"), "shine": ("shone", "shone"),
    "shoot": ("shot", "shot"), "show": ("showed", "shown"),
    "shrink": ("shrank", "shrunk"), "shut": ("shut", "shut"),
    "sing": ("sang", "sung"), "sink": ("sank", "sunk"),
    "sit": ("sat", "sat"), "slay": ("slew", "slain"),
    "sleep": ("slept", "slept"), "slide": ("slid", "slid"),
    "sling": ("slung", "slung"), "speak": ("spoke", "spoken"),
    "speed": ("sped", "sped"), "spend": ("spent", "spent"),
    "spin": ("spun", "spun"), "spread": ("spread", "spread"),
    "spring": ("sprang", "sprung"), "stand": ("stood", "stood"),
    "steal": ("stole", "stolen"), "stick": ("stuck", "stuck"),
    "sting": ("stung", "stung"), "stink": ("stank", "stunk"),
    "strike": ("struck", "struck"), "strive": ("strove", "striven"),
    "swear": ("swore", "sworn"), "sweep": ("swept", "swept"),
    "swim": ("swam", "swum"), "swing": ("swung", "swung"),
    "take": ("took", "taken"), "teach": ("taught", "taught"),
    "tear": ("tore", "torn"), "tell": ("told", "told"),
    "think": ("thought", "thought"), "throw": ("threw", "thrown"),
    "thrust": ("thrust", "thrust"), "tread": ("trod", "trodden"),
    "undergo": ("underwent", "undergone"),
    "understand": ("understood", "understood"),
    "undertake": ("undertook", "undertaken"), "upset": ("upset", "upset"),
    "wake": ("woke", "woken"), "wear": ("wore", "worn"),
    "weave": ("wove", "woven"), "weep": ("wept", "wept"),
    "win": ("won", "won"), "wind": ("wound", "wound"),
    "withdraw": ("withdrew", "withdrawn"), "wring": ("wrung", "wrung"),
    "write": ("wrote", "written"),
}

# Regular verbs whose base cannot be recovered from inflected forms by
# orthography alone (mostly e-final polysyllables); listing them makes the
# reverse lookup exact.  Users needing full coverage load a complete table.
_LISTED_REGULARS = [
    "activate", "appreciate", "assassinate", "associate", "attribute",
    "calculate", "captivate", "celebrate", "communicate", "compute",
    "constitute", "contribute", "create", "cultivate", "decorate",
    "dedicate", "dictate", "dilute", "dispute", "distribute", "dominate",
    "donate", "educate", "elevate", "eliminate", "estimate", "evacuate",
    "excavate", "execute", "fabricate", "facilitate", "fascinate",
    "graduate", "hesitate", "imitate", "indicate", "innovate", "integrate",
    "investigate", "irritate", "locate", "motivate", "narrate", "negotiate",
    "nominate", "operate", "permeate", "persecute", "pollute", "prosecute",
    "relate", "relocate", "renovate", "salute", "separate", "stimulate",
    "substitute", "terminate", "tolerate", "vaccinate",
]

# Verbs whose full paradigm is exceptional.
_FULL_IRREGULAR = {
    "be": {"3sg": "is", "past": "was", "pastpart": "been", "prespart": "being"},
    "have": {"3sg": "has", "past": "had", "pastpart": "had",
             "prespart": "having"},
    "do": {"3sg": "does", "past": "did", "pastpart": "done",
           "prespart": "doing"},
    "go": {"3sg": "goes", "past": "went", "pastpart": "gone",
           "prespart": "going"},
}


def _is_vowel(ch: str) -> bool:
    return ch in _VOWELS


def _vowel_groups(word: str) -> int:
    groups = 0
    prev = False
    for ch in word:
        v = _is_vowel(ch) or ch == "y"
        if v and not prev:
            groups += 1
        prev = v
    return groups


def _should_double(base: str) -> bool:
    """Final-consonant doubling: monosyllabic consonant-vowel-consonant bases
    with a final consonant outside w/x/y (stop -> stopped)."""
    if len(base) < 3:
        return False
    a, b, c = base[-3], base[-2], base[-1]
    if _is_vowel(c) or c in _NO_DOUBLE_FINALS:
        return False
    if not _is_vowel(b) or _is_vowel(a):
        return False
    return _vowel_groups(base) == 1


def _implausible_base(stem: str) -> bool:
    """Endings English bases do not use without a final e (so e-restoration
    should win): bare v/u, and consonant + l other than ll."""
    if stem[-1] in "vu":
        return True
    if (len(stem) >= 2 and stem[-1] == "l" and stem[-2] != "l"
            and not _is_vowel(stem[-2])):
        return True
    return False


def regular_forms(base: str) -> dict:
    """Inflect a base verb by the documented orthographic rules."""
    if base.endswith(("s", "x", "z", "ch", "sh", "o")):
        third = base + "es"
    elif base.endswith("y") and len(base) > 1 and not _is_vowel(base[-2]):
        third = base[:-1] + "ies"
    else:
        third = base + "s"

    if base.endswith("e"):
        past = base + "d"
    elif base.endswith("y") and len(base) > 1 and not _is_vowel(base[-2]):
        past = base[:-1] + "ied"
    elif _should_double(base):
        past = base + base[-1] + "ed"
    else:
        past = base + "ed"

    if base.endswith("ie"):
        prespart = base[:-2] + "ying"
    elif base.endswith("e") and not base.endswith(("ee", "oe", "ye")):
        prespart = base[:-1] + "ing"
    elif _should_double(base):
        prespart = base + base[-1] + "ing"
    else:
        prespart = base + "ing"

    return {"3sg": third, "past": past, "pastpart": past, "prespart": prespart}


class InflectionTable:
    """Base-to-forms and form-to-base lookup for verbs.

    The table answers for any lowercase base: loaded or built-in entries win,
    regular verbs are generated on demand.
    """

    def __init__(self, entries: Optional[dict] = None):
        self._entries: dict = {}
        self._reverse: dict = {}
        for base, forms in _FULL_IRREGULAR.items():
            self._put(base, dict(forms))
        for base, (past, pastpart) in _IRREGULAR_PAST.items():
            forms = regular_forms(base)
            forms["past"] = past
            forms["pastpart"] = pastpart
            self._put(base, forms)
        for base in _LISTED_REGULARS:
            self._put(base, regular_forms(base))
        if entries:
            for base, forms in entries.items():
                self.add(base, forms)

    def _put(self, base: str, forms: dict):
        self._entries[base] = forms
        for form in forms.values():
            self._reverse.setdefault(form, set()).add(base)
        self._reverse.setdefault(base, set()).add(base)

    def add(self, base: str, forms: dict):
        base = base.lower()
        existing = self._entries.get(base)
        if existing is not None and existing != forms:
            raise ValueError(
                f"conflicting inflections for base {base!r}: "
                f"{existing} vs {forms}")
        self._put(base, forms)

    def forms(self, base: str) -> dict:
        base = base.lower()
        if not base or not base.isalpha():
            raise RuleError(f"not a verb base: {base!r}")
        entry = self._entries.get(base)
        return dict(entry) if entry is not None else regular_forms(base)

    def all_forms(self, base: str) -> list:
        """Base plus every inflected form, deduplicated, in paradigm order."""
        forms = self.forms(base)
        out = [base.lower()]
        for key in FORM_KEYS:
            if forms[key] not in out:
                out.append(forms[key])
        return out

    def bases_of(self, form: str) -> list:
        """Known bases having ``form`` in their paradigm (table inversion)."""
        return sorted(self._reverse.get(form, ()))

    def guess_base(self, form: str) -> Optional[str]:
        """Best-effort base recovery for regular forms not in the table.

        Candidate stems are tried in a fixed priority per suffix (consonant
        undoubling, ``y`` restoration, plain strip, ``e`` restoration) and
        validated by re-inflection; table inversion wins outright.
        """
        form = form.lower()
        known = self.bases_of(form)
        if known:
            return known[0]
        candidates = []
        if form.endswith("ied") and len(form) > 4:
            candidates.append(form[:-3] + "y")
        if form.endswith("ies") and len(form) > 4:
            candidates.append(form[:-3] + "y")
        for suffix in ("ed", "ing"):
            if not form.endswith(suffix) or len(form) <= len(suffix) + 1:
                continue
            stem = form[: -len(suffix)]
            if (len(stem) >= 3 and stem[-1] == stem[-2]
                    and stem[-2:] not in _STEM_DOUBLES):
                candidates.append(stem[:-1])
            if suffix == "ing" and stem.endswith("y") and len(stem) == 2:
                candidates.append(stem[:-1] + "ie")  # dying -> die
            candidates.append(stem)
            candidates.append(stem + "e")
        if form.endswith("es") and len(form) > 3:
            stem = form[:-2]
            if stem.endswith(("x", "z", "ch", "sh", "o", "ss")):
                candidates.append(stem)
        if form.endswith("s") and not form.endswith("ss") and len(form) > 2:
            candidates.append(form[:-1])
        for cand in candidates:
            if not cand or not cand.isalpha() or _implausible_base(cand):
                continue
            if form in regular_forms(cand).values():
                return cand
        # A bare base is itself a usable form (non-third-person present).
        if form.isalpha():
            return form
        return None


def load_inflections(path, table: Optional[InflectionTable] = None) -> InflectionTable:
    """Extend (or create) a table from a TSV file of five columns."""
    table = table or InflectionTable()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 5:
                raise ValueError(
                    f"line {line_no}: expected 5 tab-separated fields, "
                    f"got {len(cols)}")
            base = cols[0].strip().lower()
            forms = dict(zip(FORM_KEYS, (c.strip() for c in cols[1:])))
            if not base or any(not v for v in forms.values()):
                raise ValueError(f"line {line_no}: empty field")
            table.add(base, forms)
    return table


_DEFAULT_TABLE = InflectionTable()


def default_table() -> InflectionTable:
    return _DEFAULT_TABLE


# -- verb-pattern predicate expansion --------------------------------------------


def _forms_disjunction(verb: str, forms: Iterable[str]):
    parts = tuple(Atom("token", (Var(verb), Const(f))) for f in forms)
    return parts[0] if len(parts) == 1 else Or(parts)


def expand_act_ind(subject: str, verb: str, base: str, fresh: Callable[[str], str],
                   table: Optional[InflectionTable] = None):
    table = table or _DEFAULT_TABLE
    forms = table.all_forms(base)
    aux = fresh("aux")
    return And((
        _forms_disjunction(verb, forms),
        Or((Atom("nsubj", (Var(verb), Var(subject))),
            Atom("xsubj", (Var(verb), Var(subject))))),
        Not(Exists(aux, Atom("auxpass", (Var(verb), Var(aux))))),
    ))


def expand_pass_ind(patient: str, verb: str, base: str, fresh: Callable[[str], str],
                    table: Optional[InflectionTable] = None):
    table = table or _DEFAULT_TABLE
    pastpart = table.forms(base)["pastpart"]
    aux = fresh("aux")
    return And((
        Atom("token", (Var(verb), Const(pastpart))),
        Atom("nsubjpass", (Var(verb), Var(patient))),
        Exists(aux, Atom("auxpass", (Var(verb), Var(aux)))),
    ))


# -- rule generalization -----------------------------------------------------------


def generalize_rule(rule: Rule, table: Optional[InflectionTable] = None) -> Rule:
    """Rewrite a ``nsubj``/``dobj``/``token`` rule to cover every tense plus
    the passive form.

    The lexical verb atom, subject and object links are replaced by an
    ``actInd``/``dobj`` disjunct and a ``passInd``/``agent`` disjunct; all
    other conjuncts are preserved in both branches.
    """
    table = table or _DEFAULT_TABLE
    body = rule.body
    parts = list(body.parts) if isinstance(body, And) else [body]
    atoms = [p for p in parts if isinstance(p, Atom)]

    verb_var = None
    base = None
    token_atom = None
    for a in atoms:
        if a.pred == "token" and len(a.args) == 2 \
                and isinstance(a.args[0], Var) and isinstance(a.args[1], Const) \
                and isinstance(a.args[1].value, str):
            guess = table.guess_base(a.args[1].value)
            if guess is None:
                continue
            v = a.args[0].name
            has_subj = any(p.pred == "nsubj" and isinstance(p.args[0], Var)
                           and p.args[0].name == v for p in atoms)
            has_obj = any(p.pred == "dobj" and isinstance(p.args[0], Var)
                          and p.args[0].name == v for p in atoms)
            if has_subj and has_obj:
                verb_var, base, token_atom = v, guess, a
                break
    if verb_var is None:
        raise RuleError(
            "not generalizable: need token(v, <verb form>) with nsubj(v, _) "
            "and dobj(v, _) in the rule body")

    subj_atom = next(p for p in atoms if p.pred == "nsubj"
                     and p.args[0] == Var(verb_var))
    obj_atom = next(p for p in atoms if p.pred == "dobj"
                    and p.args[0] == Var(verb_var))
    subj = subj_atom.args[1]
    obj = obj_atom.args[1]
    rest = tuple(p for p in parts if p not in (token_atom, subj_atom, obj_atom))

    active = And((Atom("actInd", (subj, Var(verb_var), Const(base))),
                  Atom("dobj", (Var(verb_var), obj))) + rest)
    passive = And((Atom("passInd", (obj, Var(verb_var), Const(base))),
                   Atom("agent", (Var(verb_var), subj))) + rest)
    new_body = normalize(Or((active, passive)))
    return Rule(rule.head, new_body, comment=rule.comment)


# -- verb pattern templates -----------------------------------------------------------


@dataclass(frozen=True)
class VerbPatternTemplate:
    template_id: str
    description: str
    voice: str  # "active" or "passive"

    def instantiate(self, base: str, subject: str = "a", obj: str = "b",
                    verb: str = "c",
                    table: Optional[InflectionTable] = None):
        table = table or _DEFAULT_TABLE
        forms = table.forms(base)
        builder = _TEMPLATE_BUILDERS[self.template_id]
        return normalize(builder(base, forms, subject, obj, verb))

    def instantiate_rule(self, pred: str, base: str,
                         table: Optional[InflectionTable] = None) -> Rule:
        body = self.instantiate(base, table=table)
        return Rule(Atom(pred, (Var("a"), Var("b"))), body)


def _dep(label, h, d):
    return Atom(label, (Var(h), Var(d)))


def _tok(v, word):
    return Atom("token", (Var(v), Const(word)))


def _aux_word(verb, words, slot="x"):
    alts = tuple(And((_dep("aux", verb, slot), _tok(slot, w))) for w in words)
    inner = alts[0] if len(alts) == 1 else Or(alts)
    return Exists(slot, inner)


_MODALS = ("will", "would", "can", "could", "may", "might", "must", "shall",
           "should")

_TEMPLATE_BUILDERS: dict = {}
_TEMPLATE_LIST: list = []


def _template(template_id, description, voice):
    def register(builder):
        _TEMPLATE_BUILDERS[template_id] = builder
        _TEMPLATE_LIST.append(VerbPatternTemplate(template_id, description, voice))
        return builder
    return register


def _active(form_key, extra=None):
    def build(base, forms, s, o, v):
        word = base if form_key == "base" else forms[form_key]
        parts = [_tok(v, word), _dep("nsubj", v, s), _dep("dobj", v, o)]
        if extra is not None:
            parts.append(extra(v))
        return And(tuple(parts))
    return build


def _passive(extra=None, participle="pastpart"):
    def build(base, forms, s, o, v):
        parts = [_tok(v, forms[participle]), _dep("nsubjpass", v, o),
                 Exists("x", _dep("auxpass", v, "x")), _dep("agent", v, s)]
        if extra is not None:
            parts.append(extra(v))
        return And(tuple(parts))
    return build


_template("act-simple-past", "simple past (X killed Y)", "active")(
    _active("past"))
_template("act-pres-3sg", "simple present, third singular (X kills Y)",
          "active")(_active("3sg"))
_template("act-pres-plural", "simple present, other persons (they kill Y)",
          "active")(_active("base"))

for _word, _person in (("is", "3sg"), ("are", "plural"), ("am", "1sg")):
    _template(f"act-pres-prog-{_word}",
              f"present progressive, {_person} (X {_word} killing Y)",
              "active")(_active("prespart", extra=lambda v, w=_word:
                                _aux_word(v, (w,))))
for _word, _person in (("was", "singular"), ("were", "plural")):
    _template(f"act-past-prog-{_word}",
              f"past progressive, {_person} (X {_word} killing Y)",
              "active")(_active("prespart", extra=lambda v, w=_word:
                                _aux_word(v, (w,))))
for _word, _person in (("has", "3sg"), ("have", "plural")):
    _template(f"act-pres-perf-{_word}",
              f"present perfect, {_person} (X {_word} killed Y)",
              "active")(_active("pastpart", extra=lambda v, w=_word:
                                _aux_word(v, (w,))))
_template("act-past-perf", "past perfect (X had killed Y)", "active")(
    _active("pastpart", extra=lambda v: _aux_word(v, ("had",))))

for _modal in _MODALS:
    _template(f"act-modal-{_modal}", f"modal (X {_modal} kill Y)", "active")(
        _active("base", extra=lambda v, m=_modal: _aux_word(v, (m,))))


def _act_xcomp(form_key):
    def build(base, forms, s, o, v):
        word = base if form_key == "base" else forms[form_key]
        return And((_tok(v, word), _dep("xsubj", v, s), _dep("dobj", v, o)))
    return build


_template("act-xcomp-base", "infinitival complement (X decided to kill Y)",
          "active")(_act_xcomp("base"))
_template("act-xcomp-gerund", "gerund complement (X regretted killing Y)",
          "active")(_act_xcomp("prespart"))


def _act_modifier(label):
    def build(base, forms, s, o, v):
        return And((_tok(v, forms["prespart" if label == "partmod" else "past"]),
                    _dep(label, s, v), _dep("dobj", v, o)))
    return build


_template("act-partmod", "participial modifier (X, killing Y, ...)",
          "active")(_act_modifier("partmod"))
_template("act-rcmod", "relative clause (X, who killed Y)", "active")(
    _act_modifier("rcmod"))

_template("pass-simple", "passive (Y was killed by X)", "passive")(_passive())
for _word in ("has", "have", "had"):
    _template(f"pass-perf-{_word}", f"passive perfect (Y {_word} been killed by X)",
              "passive")(_passive(extra=lambda v, w=_word: _aux_word(v, (w,))))
for _modal in _MODALS:
    _template(f"pass-modal-{_modal}",
              f"passive modal (Y {_modal} be killed by X)", "passive")(
        _passive(extra=lambda v, m=_modal: _aux_word(v, (m,))))
_template("pass-progressive", "passive progressive (Y is being killed by X)",
          "passive")(_passive(extra=lambda v: _aux_word(v, ("being",))))


def _pass_modifier(label):
    def build(base, forms, s, o, v):
        return And((_tok(v, forms["pastpart"]), _dep(label, o, v),
                    _dep("agent", v, s)))
    return build


_template("pass-partmod", "passive participial modifier (Y, killed by X)",
          "passive")(_pass_modifier("partmod"))
_template("pass-rcmod", "passive relative clause (Y, who was killed by X)",
          "passive")(_pass_modifier("rcmod"))


def enumerate_templates() -> list:
    """The deterministic template family; its size is reported, not forced."""
    return list(_TEMPLATE_LIST)


def template_count() -> int:
    return len(_TEMPLATE_LIST)
