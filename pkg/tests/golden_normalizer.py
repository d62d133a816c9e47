"""Hand-built normalizer cases: (token, tag, lang_aware, expected serialization)."""

GOLDEN = [
    # entities, one per kind
    ("http://t.co/ab1", "other", True, "<url>"),
    ("ana@mail.com", "other", True, "<email>"),
    ("@maria_88", "lang2", True, "<user>"),
    ("50%", "other", True, "<percent>"),
    ("$10", "lang1", True, "<money>"),
    ("555-123-4567", "other", True, "<phone>"),
    ("12:30", "other", True, "<time>"),
    ("10/10/2015", "lang2", True, "<date>"),
    ("42", "other", True, "<number>"),
    ("3.5", "other", True, "<number>"),
    # style
    ("WOW", "lang1", True, "wow <allcaps>"),
    ("!!!", "other", True, "! <repeated>"),
    ("...", "other", True, ". <repeated>"),
    ("*great*", "lang1", True, "great <emphasized>"),
    ("_so_", "lang1", True, "so <emphasized>"),
    ("f**k", "lang1", True, "f**k <censored>"),
    ("niiiice", "lang1", True, "nice <elongated>"),
    ("lovvve", "lang1", True, "love <elongated>"),
    ("GOOOD", "lang1", True, "good <allcaps> <elongated>"),
    ("YESSS", "lang1", True, "yes <allcaps> <elongated>"),
    # hashtags
    ("#lovemylife", "other", True, "<hashtag> love my life </hashtag>"),
    ("#LoveMyLife", "other", True, "<hashtag> love my life </hashtag>"),
    ("#sadmondays", "other", True, "<hashtag> sad mondays </hashtag>"),
    ("#day2", "other", True, "<hashtag> day <number> </hashtag>"),
    # spelling
    ("lovr", "lang1", True, "love"),
    ("frend", "lang1", True, "friend"),
    ("helo", "lang1", True, "hello"),
    # untouched
    ("Hello", "lang1", True, "Hello"),
    ("Maria", "ne", True, "Maria"),
    (":)", "other", True, ":)"),
    # lang2 bypass and its absence
    ("JAJAJA", "lang2", True, "JAJAJA"),
    ("niiiice", "lang2", True, "niiiice"),
    ("s**t", "lang2", True, "s**t"),
    ("#lovemylife", "lang2", True, "<hashtag> lovemylife </hashtag>"),
    ("JAJAJA", "lang2", False, "jajaja <allcaps>"),
    ("niiiice", "lang2", False, "nice <elongated>"),
    ("#lovemylife", "lang2", False, "<hashtag> love my life </hashtag>"),
]
