"""Write the two reference ontological models to models/ as JSON."""

from pathlib import Path

from onticlab.toymodels import martin_spekkens_mzi, spekkens_toy_bit

OUT = Path(__file__).resolve().parent.parent / "models"


def main():
    OUT.mkdir(exist_ok=True)
    spekkens_toy_bit().save(OUT / "toybit.json")
    martin_spekkens_mzi().save(OUT / "martin_spekkens.json")
    print(f"wrote {OUT / 'toybit.json'} and {OUT / 'martin_spekkens.json'}")


if __name__ == "__main__":
    main()
