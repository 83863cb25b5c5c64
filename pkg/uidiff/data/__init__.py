from .annotations import dump_annotations, load_annotations, read_annotation_file, write_annotation_file
from .build import generate_dataset, generate_pair, load_bases, synthetic_bases
from .detection import AnnotationFile, DetectorNoise, DetectorSource, GroundTruth, load_detections
from .manifest import Manifest, PairRecord, load_manifest, split_pairs, write_manifest
from .mutations import ChangeKind, GeneratedPair, apply_change
from .transforms import CutSpec, cut_and_shift
