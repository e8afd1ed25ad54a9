import csv
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, TextIO, Union

from ..device_profile import DeviceProfile, dump_profile
from ..logger import log


def _fieldnames(rows: Sequence[Mapping[str, Any]]) -> List[str]:
    names: Dict[str, None] = {}
    for row in rows:
        names.update(dict.fromkeys(row))
    return list(names)


def _write_rows(stream: TextIO, rows: Sequence[Mapping[str, Any]]) -> None:
    writer = csv.DictWriter(stream, fieldnames=_fieldnames(rows), restval='', lineterminator='\n')
    writer.writeheader()
    writer.writerows(rows)


def export_csv(rows: Sequence[Mapping[str, Any]], filename: Optional[Union[str, Path]] = None,
               stream: Optional[TextIO] = None) -> Optional[Exception]:
    """Write ``rows`` with a header row to ``filename``, or to ``stream`` (stdout by default)."""
    if not rows:
        log.warning('no rows to export')
        return None
    try:
        if filename is None:
            _write_rows(stream or sys.stdout, rows)
        else:
            with open(filename, 'w', newline='') as f:
                _write_rows(f, rows)
            log.debug(f'{len(rows)} rows written to {filename}')
    except OSError as e:
        return e
    return None


def save_profile(profile: DeviceProfile, filename: Union[str, Path]) -> Optional[Exception]:
    try:
        with open(filename, 'w') as f:
            json.dump(dump_profile(profile), f, indent=2)
            f.write('\n')
    except OSError as e:
        return e
    log.debug(f'profile {profile.name} saved to {filename}')
    return None
