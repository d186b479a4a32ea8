import numpy as np
import pytest

from core.exceptions import (
    ChargeAssignmentError,
    ExtractionError,
    InputError,
    LigandResolutionError,
    StructureParseError,
)
from schemas.params import AlignConfig, ExtractionConfig, MissingChargePolicy
from tests.conftest import pdb_line
from utils.align import sup_ck
from utils.geometry import kernel_ck
from utils.pdb import cloud_at_radius, extract_ligand, extract_pocket, load_charge_table, parse_structure


class TestParseStructure:
    def test_records_and_filters(self, pocket_pdb_text):
        structure = parse_structure(pocket_pdb_text, source="1abc.pdb")
        # altLoc B and hydrogen dropped
        assert [atom.atom_name for atom in structure.protein_atoms] == ["CA", "N", "CB"]
        assert set(structure.het_groups) == {("ATP", "A", 500), ("HOH", "A", 600)}
        first = structure.protein_atoms[0]
        assert first.position == (4.0, 0.0, 0.0)
        assert (first.res_name, first.res_seq, first.chain, first.element) == ("ALA", 1, "A", "C")

    def test_first_model_only(self):
        text = "\n".join([
            "MODEL        1",
            pdb_line("ATOM", 1, "CA", "ALA", "A", 1, 1.0, 0.0, 0.0, "C"),
            "ENDMDL",
            "MODEL        2",
            pdb_line("ATOM", 1, "CA", "ALA", "A", 1, 9.0, 0.0, 0.0, "C"),
            "ENDMDL",
        ])
        structure = parse_structure(text)
        assert [atom.position for atom in structure.protein_atoms] == [(1.0, 0.0, 0.0)]

    def test_element_from_atom_name_when_column_missing(self):
        line = pdb_line("ATOM", 1, "N", "GLY", "A", 2, 1.0, 2.0, 3.0, "N")[:76]
        structure = parse_structure(line)
        assert structure.protein_atoms[0].element == "N"

    def test_malformed_coordinates_report_line(self):
        good = pdb_line("ATOM", 1, "CA", "ALA", "A", 1, 1.0, 0.0, 0.0, "C")
        bad = good[:30] + "   abc.de" + good[39:]
        with pytest.raises(StructureParseError) as excinfo:
            parse_structure("\n".join(["HEADER", good, bad]))
        assert excinfo.value.line_number == 3

    def test_no_atoms(self):
        with pytest.raises(StructureParseError):
            parse_structure("HEADER    EMPTY\nEND\n")


class TestExtractPocket:
    @pytest.mark.parametrize("radius,expected", [(5.3, 2), (5.2, 1), (5.5, 3)])
    def test_strict_radius(self, pocket_pdb_text, radius, expected):
        structure = parse_structure(pocket_pdb_text, source="1abc.pdb")
        pocket = extract_pocket(structure, ExtractionConfig(ligand_code="ATP", cutoff_radius=radius))
        assert len(pocket) == expected
        assert pocket.ligand_class == "ATP"
        assert pocket.id == "1abc_ATP"

    def test_empty_pocket(self, pocket_pdb_text):
        structure = parse_structure(pocket_pdb_text)
        with pytest.raises(ExtractionError):
            extract_pocket(structure, ExtractionConfig(ligand_code="ATP", cutoff_radius=0.1))

    def test_nearest_ligand_atom_counts(self):
        text = "\n".join([
            pdb_line("HETATM", 1, "C1", "LIG", "A", 900, 0.0, 0.0, 0.0, "C"),
            pdb_line("HETATM", 2, "C2", "LIG", "A", 900, 20.0, 0.0, 0.0, "C"),
            pdb_line("ATOM", 3, "CA", "ALA", "A", 1, 23.0, 0.0, 0.0, "C"),
            pdb_line("ATOM", 4, "CB", "ALA", "A", 1, 10.0, 0.0, 0.0, "C"),
        ])
        pocket = extract_pocket(parse_structure(text), ExtractionConfig(ligand_code="LIG"))
        assert [atom.position for atom in pocket.atoms] == [(23.0, 0.0, 0.0)]

    def test_water_needs_both_flags(self, pocket_pdb_text):
        structure = parse_structure(pocket_pdb_text)
        base = dict(ligand_code="ATP", cutoff_radius=5.3)
        hetero = extract_pocket(structure, ExtractionConfig(**base, include_hetero=True))
        water = extract_pocket(structure, ExtractionConfig(**base, include_hetero=True, include_water=True))
        assert len(hetero) == 2
        assert len(water) == 3
        assert water.atoms[-1].res_name == "HOH"

    def test_unknown_ligand_lists_het_codes(self, pocket_pdb_text):
        structure = parse_structure(pocket_pdb_text)
        with pytest.raises(LigandResolutionError) as excinfo:
            extract_pocket(structure, ExtractionConfig(ligand_code="NAD"))
        assert excinfo.value.candidates == ["ATP", "HOH"]

    def test_ambiguous_ligand(self, pocket_pdb_text):
        text = pocket_pdb_text + pdb_line("HETATM", 8, "PG", "ATP", "B", 501, 30.0, 0.0, 0.0, "P") + "\n"
        structure = parse_structure(text)
        with pytest.raises(LigandResolutionError) as excinfo:
            extract_pocket(structure, ExtractionConfig(ligand_code="ATP"))
        assert excinfo.value.candidates == ["ATP:A:500", "ATP:B:501"]
        pocket = extract_pocket(structure, ExtractionConfig(ligand_code="ATP", ligand_chain="A"))
        assert len(pocket) == 2

    def test_cloud_at_radius(self, pocket_pdb_text):
        structure = parse_structure(pocket_pdb_text)
        cfg = ExtractionConfig(ligand_code="ATP")
        assert len(cloud_at_radius(structure, cfg, 5.5, cloud_id="p")) == 3
        assert cfg.cutoff_radius == 5.3


class TestChargeAssignment:
    table = {("ALA", "CA"): 0.1}

    def extract(self, text, policy):
        cfg = ExtractionConfig(ligand_code="ATP", charge_table=self.table, missing_charge_policy=policy)
        return extract_pocket(parse_structure(text), cfg)

    def test_zero_policy(self, pocket_pdb_text):
        pocket = self.extract(pocket_pdb_text, MissingChargePolicy.ZERO)
        assert list(pocket.labels) == [0.1, 0.0]

    def test_skip_policy(self, pocket_pdb_text):
        pocket = self.extract(pocket_pdb_text, MissingChargePolicy.SKIP)
        assert [atom.atom_name for atom in pocket.atoms] == ["CA"]

    def test_error_policy_names_pairs(self, pocket_pdb_text):
        with pytest.raises(ChargeAssignmentError) as excinfo:
            self.extract(pocket_pdb_text, MissingChargePolicy.ERROR)
        assert excinfo.value.missing == [("GLY", "N")]


class TestLoadChargeTable:
    def test_reads_table(self, tmp_path):
        path = tmp_path / "charges.csv"
        path.write_text("res_name,atom_name,charge\nALA,CA,0.1\nNA,NA,1.0\n")
        table = load_charge_table(str(path))
        assert table == {("ALA", "CA"): 0.1, ("NA", "NA"): 1.0}

    def test_missing_columns(self, tmp_path):
        path = tmp_path / "charges.csv"
        path.write_text("res,atom,q\nALA,CA,0.1\n")
        with pytest.raises(InputError):
            load_charge_table(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError):
            load_charge_table(str(tmp_path / "nope.csv"))


class TestExtractLigand:
    def test_ligand_cloud_self_score(self, rng):
        lines = [
            pdb_line("HETATM", i + 1, f"C{i + 1}", "LIG", "A", 900, *rng.uniform(0.0, 6.0, size=3), "C")
            for i in range(12)
        ]
        lines.append(pdb_line("ATOM", 20, "CA", "ALA", "A", 1, 30.0, 0.0, 0.0, "C"))
        ligand = extract_ligand(parse_structure("\n".join(lines), source="2xyz.pdb"), "LIG")
        assert ligand.id == "2xyz_LIG_ligand"
        assert len(ligand) == 12
        assert np.all(ligand.labels == 0.0)
        assert sup_ck(ligand, ligand, AlignConfig()).score >= 0.99 * kernel_ck(ligand, ligand)
