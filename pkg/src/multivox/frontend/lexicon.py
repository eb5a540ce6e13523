"""Built-in pronunciation lexicons for the hermetic test backend.

Each supported backend language gets a small word inventory with fixed IPA
transcriptions. The synthetic corpus generator samples its pseudo-text from
these inventories, so phonemization of the bundled corpus never needs an
external tool and vocabulary closure holds by construction.

Words absent from the inventory fall back to a fixed letter-to-symbol table,
keeping the backend total and deterministic.
"""

from __future__ import annotations

LEXICONS: dict[str, dict[str, tuple[str, ...]]] = {
    "english": {
        "hello": ("h", "ə", "l", "oʊ"),
        "water": ("w", "ɔː", "t", "ə"),
        "sun": ("s", "ʌ", "n"),
        "moon": ("m", "uː", "n"),
        "light": ("l", "aɪ", "t"),
        "river": ("r", "ɪ", "v", "ə"),
        "stone": ("s", "t", "oʊ", "n"),
        "wind": ("w", "ɪ", "n", "d"),
        "rain": ("r", "eɪ", "n"),
        "tree": ("t", "r", "iː"),
        "bird": ("b", "ɜː", "d"),
        "fire": ("f", "aɪ", "ə"),
        "cloud": ("k", "l", "aʊ", "d"),
        "song": ("s", "ɒ", "ŋ"),
        "green": ("ɡ", "r", "iː", "n"),
        "day": ("d", "eɪ"),
        "night": ("n", "aɪ", "t"),
        "home": ("h", "oʊ", "m"),
        "sea": ("s", "iː"),
        "star": ("s", "t", "ɑː"),
        "path": ("p", "ɑː", "θ"),
        "voice": ("v", "ɔɪ", "s"),
        "dream": ("d", "r", "iː", "m"),
        "gold": ("ɡ", "oʊ", "l", "d"),
    },
    "hindi": {
        "pani": ("p", "aː", "n", "iː"),
        "suraj": ("s", "uː", "r", "ə", "dʒ"),
        "chand": ("tʃ", "aː", "n", "d̪"),
        "nadi": ("n", "ə", "d̪", "iː"),
        "patthar": ("p", "ə", "t̪", "t̪", "ə", "r"),
        "hawa": ("ɦ", "ə", "ʋ", "aː"),
        "barish": ("b", "aː", "r", "ɪ", "ʃ"),
        "ped": ("p", "eː", "ɖ"),
        "aag": ("aː", "ɡ"),
        "badal": ("b", "aː", "d̪", "ə", "l"),
        "geet": ("ɡ", "iː", "t̪"),
        "raat": ("r", "aː", "t̪"),
        "din": ("d̪", "ɪ", "n"),
        "ghar": ("ɡʱ", "ə", "r"),
        "tara": ("t̪", "aː", "r", "aː"),
        "sapna": ("s", "ə", "p", "n", "aː"),
        "sona": ("s", "oː", "n", "aː"),
        "awaz": ("aː", "ʋ", "aː", "z"),
        "rasta": ("r", "aː", "s", "t̪", "aː"),
        "roshni": ("r", "oː", "ʃ", "n", "iː"),
        "phool": ("pʰ", "uː", "l"),
        "mitti": ("m", "ɪ", "ʈ", "ʈ", "iː"),
        "jangal": ("dʒ", "ə", "ŋ", "ɡ", "ə", "l"),
        "samundar": ("s", "ə", "m", "ʊ", "n", "d̪", "ə", "r"),
    },
    "bengali": {
        "jol": ("dʒ", "ɔ", "l"),
        "surjo": ("ʃ", "u", "r", "dʒ", "oː"),
        "pakhi": ("p", "a", "kʰ", "i"),
        "nodi": ("n", "ɔ", "d̪", "i"),
        "brishti": ("b", "r", "i", "ʃ", "ʈ", "i"),
        "megh": ("m", "eː", "ɡʱ"),
        "phul": ("pʰ", "u", "l"),
        "gan": ("ɡ", "a", "n"),
        "raat": ("r", "a", "t̪"),
        "bhalo": ("bʱ", "a", "l", "oː"),
        "mati": ("m", "a", "ʈ", "i"),
        "alo": ("a", "l", "oː"),
        "batash": ("b", "a", "t̪", "a", "ʃ"),
        "shagor": ("ʃ", "a", "ɡ", "ɔ", "r"),
        "tara": ("t̪", "a", "r", "a"),
        "shopno": ("ʃ", "ɔ", "p", "n", "oː"),
        "sona": ("ʃ", "oː", "n", "a"),
        "path": ("p", "ɔ", "tʰ"),
        "gachh": ("ɡ", "a", "tʃʰ"),
        "chad": ("tʃ", "a", "d̪"),
    },
    "kannada": {
        "neeru": ("n", "iː", "r", "u"),
        "surya": ("s", "uː", "r", "j", "a"),
        "hoovu": ("h", "uː", "ʋ", "u"),
        "mara": ("m", "a", "r", "a"),
        "hakki": ("h", "a", "k", "k", "i"),
        "male": ("m", "a", "ɭ", "e"),
        "gaali": ("ɡ", "aː", "ɭ", "i"),
        "kallu": ("k", "a", "l", "l", "u"),
        "bisilu": ("b", "i", "s", "i", "l", "u"),
        "nadi": ("n", "a", "d", "i"),
        "haadu": ("h", "aː", "ɖ", "u"),
        "ratri": ("r", "aː", "t", "r", "i"),
        "kanasu": ("k", "a", "n", "a", "s", "u"),
        "bangara": ("b", "ə", "ŋ", "ɡ", "aː", "r", "a"),
        "belaku": ("b", "e", "ɭ", "a", "k", "u"),
        "samudra": ("s", "a", "m", "u", "d", "r", "a"),
        "dari": ("d", "aː", "r", "i"),
        "dhvani": ("d̪", "ʋ", "a", "n", "i"),
        "chandra": ("tʃ", "ə", "n", "d", "r", "a"),
        "nakshatra": ("n", "a", "k", "ʃ", "a", "t", "r", "a"),
    },
    "marathi": {
        "paani": ("p", "aː", "ɳ", "iː"),
        "surya": ("s", "uː", "r", "j", "ə"),
        "chandra": ("tʃ", "ə", "n", "d", "r", "ə"),
        "nadi": ("n", "ə", "d̪", "iː"),
        "dagad": ("d̪", "ə", "ɡ", "ə", "ɖ"),
        "vara": ("ʋ", "aː", "r", "aː"),
        "paus": ("p", "aː", "ʊ", "s"),
        "jhad": ("dʒʱ", "aː", "ɖ"),
        "aag": ("aː", "ɡ"),
        "gaane": ("ɡ", "aː", "ɳ", "eː"),
        "ratra": ("r", "aː", "t", "r", "ə"),
        "divas": ("d̪", "ɪ", "ʋ", "ə", "s"),
        "ghar": ("ɡʱ", "ə", "r"),
        "chandane": ("tʃ", "aː", "n", "d̪", "ə", "ɳ", "eː"),
        "swapna": ("s", "ʋ", "ə", "p", "n", "ə"),
        "sone": ("s", "oː", "n", "eː"),
        "aawaj": ("aː", "ʋ", "aː", "dʒ"),
        "vaat": ("ʋ", "aː", "ʈ"),
        "samudra": ("s", "ə", "m", "ʊ", "d̪", "r", "ə"),
        "prakash": ("p", "r", "ə", "k", "aː", "ʃ"),
    },
    "telugu": {
        "neellu": ("n", "iː", "ɭ", "ɭ", "u"),
        "sooryudu": ("s", "uː", "r", "j", "u", "ɖ", "u"),
        "chandrudu": ("tʃ", "ə", "n", "d", "r", "u", "ɖ", "u"),
        "nadi": ("n", "ə", "d", "i"),
        "raayi": ("r", "aː", "j", "i"),
        "gaali": ("ɡ", "aː", "l", "i"),
        "vaana": ("ʋ", "aː", "n", "ə"),
        "chettu": ("tʃ", "e", "ʈ", "ʈ", "u"),
        "paata": ("p", "aː", "ʈ", "ə"),
        "raatri": ("r", "aː", "t", "r", "i"),
        "pagalu": ("p", "ə", "ɡ", "ə", "l", "u"),
        "illu": ("i", "l", "l", "u"),
        "kala": ("k", "ə", "l", "ə"),
        "bangaram": ("b", "ə", "ŋ", "ɡ", "aː", "r", "ə", "m"),
        "velugu": ("ʋ", "e", "l", "u", "ɡ", "u"),
        "samudram": ("s", "ə", "m", "u", "d", "r", "ə", "m"),
        "daari": ("d̪", "aː", "r", "i"),
        "swaram": ("s", "ʋ", "ə", "r", "ə", "m"),
        "mantalu": ("m", "ə", "n", "ʈ", "ə", "l", "u"),
        "nakshatram": ("n", "ə", "k", "ʃ", "ə", "t", "r", "ə", "m"),
    },
}

# Grapheme fallback for words outside the inventories. Total over ASCII
# letters and digits so the lexicon backend never fails.
LETTER_FALLBACK = {
    "a": "a", "b": "b", "c": "k", "d": "d", "e": "e", "f": "f", "g": "ɡ",
    "h": "h", "i": "i", "j": "dʒ", "k": "k", "l": "l", "m": "m", "n": "n",
    "o": "o", "p": "p", "q": "k", "r": "r", "s": "s", "t": "t", "u": "u",
    "v": "ʋ", "w": "w", "x": "k", "y": "j", "z": "z",
    "0": "z", "1": "w", "2": "t", "3": "θ", "4": "f",
    "5": "f", "6": "s", "7": "s", "8": "eɪ", "9": "n",
}

# Placeholder when a word has no mappable characters at all.
GLOTTAL_STOP = "ʔ"


def lookup(word: str, backend_code: str) -> tuple[str, ...]:
    """Transcribe one word, falling back to the letter table."""
    lex = LEXICONS.get(backend_code, {})
    key = word.casefold()
    if key in lex:
        return lex[key]
    phones = tuple(LETTER_FALLBACK[ch] for ch in key if ch in LETTER_FALLBACK)
    return phones if phones else (GLOTTAL_STOP,)
